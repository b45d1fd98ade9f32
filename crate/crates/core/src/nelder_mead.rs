//! Derivative-free simplex minimization (Nelder–Mead with dimension-adaptive
//! coefficients).

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Stop when the spread of function values across the simplex drops below this.
    pub f_tol: f64,
    /// ...and every vertex lies within this distance of the best one.
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            f_tol: 1e-14,
            x_tol: 1e-10,
            max_evals: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        assert!(n > 0, "cannot minimize over zero parameters");
        let dim = n as f64;
        let alpha = 1.0;
        let gamma = 1.0 + 2.0 / dim;
        let rho = 0.75 - 1.0 / (2.0 * dim);
        let sigma = 1.0 - 1.0 / dim;

        let mut evals = 0;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let v0 = eval(x0, &mut evals);
        simplex.push((x0.to_vec(), v0));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.initial_step;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }

        let mut converged = false;
        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];
        while evals < self.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[n].1;
            let spread = (worst - best).abs();
            let size = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread <= self.f_tol && size <= self.x_tol {
                converged = true;
                break;
            }
            if size <= f64::EPSILON * 4.0 {
                // Collapsed simplex; no further progress is possible.
                converged = spread <= self.f_tol;
                break;
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / dim;
                }
            }

            let along = |t: f64, out: &mut Vec<f64>, worst: &[f64]| {
                for ((o, c), w) in out.iter_mut().zip(&centroid).zip(worst) {
                    *o = c + t * (c - w);
                }
            };

            let worst_x = simplex[n].0.clone();
            along(alpha, &mut trial, &worst_x);
            let f_r = eval(&trial, &mut evals);
            let second_worst = simplex[n - 1].1;

            if f_r < best {
                along(gamma, &mut trial2, &worst_x);
                let f_e = eval(&trial2, &mut evals);
                if f_e < f_r {
                    simplex[n] = (trial2.clone(), f_e);
                } else {
                    simplex[n] = (trial.clone(), f_r);
                }
                continue;
            }
            if f_r < second_worst {
                simplex[n] = (trial.clone(), f_r);
                continue;
            }
            // Contraction, outside if the reflected point beat the worst vertex.
            let (t, reference) = if f_r < worst {
                (alpha * rho, f_r)
            } else {
                (-rho, worst)
            };
            along(t, &mut trial2, &worst_x);
            let f_c = eval(&trial2, &mut evals);
            if f_c < reference {
                simplex[n] = (trial2.clone(), f_c);
                continue;
            }
            // Shrink towards the best vertex.
            let best_x = simplex[0].0.clone();
            for (x, v) in simplex[1..].iter_mut() {
                for (xi, bi) in x.iter_mut().zip(&best_x) {
                    *xi = bi + sigma * (*xi - bi);
                }
                *v = eval(x, &mut evals);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            evals,
            converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let nm = NelderMead::default();
        let m = nm.minimize(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + x[2].powi(2),
            &[0.0, 0.0, 0.0],
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6);
        assert!((m.x[1] + 2.0).abs() < 1e-6);
        assert!(m.value < 1e-12);
    }

    #[test]
    fn rosenbrock() {
        let nm = NelderMead {
            max_evals: 50_000,
            ..Default::default()
        };
        let m = nm.minimize(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
        );
        assert!((m.x[0] - 1.0).abs() < 1e-5, "{:?}", m);
        assert!((m.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn nonsmooth_max_of_abs() {
        let nm = NelderMead::default();
        let m = nm.minimize(|x| (x[0] - 0.3).abs().max((x[1] + 0.1).abs()), &[1.0, 1.0]);
        assert!(m.value < 1e-8, "{:?}", m);
    }

    #[test]
    fn budget_is_respected() {
        let nm = NelderMead {
            max_evals: 50,
            ..Default::default()
        };
        let m = nm.minimize(|x| x.iter().map(|v| v * v).sum(), &[5.0; 6]);
        assert!(!m.converged);
        assert!(m.evals <= 50 + 7);
    }
}
