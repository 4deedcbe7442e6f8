//! Box-constrained Nelder–Mead with a hard evaluation budget.

/// Result of a minimization: the best point ever evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// Calls made to the objective (the supplied starting value is not counted).
    pub evals: usize,
}

#[derive(Clone, Debug)]
pub struct NelderMead {
    pub max_evals: usize,
    pub initial_step: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 200,
            initial_step: 0.05,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

struct Budgeted<'a, F> {
    f: F,
    lower: &'a [f64],
    upper: &'a [f64],
    left: usize,
    evals: usize,
    best: (Vec<f64>, f64),
}

impl<F: FnMut(&[f64]) -> f64> Budgeted<'_, F> {
    fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    fn eval(&mut self, mut x: Vec<f64>) -> Option<(Vec<f64>, f64)> {
        if self.left == 0 {
            return None;
        }
        self.project(&mut x);
        self.left -= 1;
        self.evals += 1;
        let mut v = (self.f)(&x);
        if v.is_nan() {
            v = f64::INFINITY;
        }
        if v < self.best.1 {
            self.best = (x.clone(), v);
        }
        Some((x, v))
    }
}

impl NelderMead {
    /// Minimizes `f` inside `[lower, upper]` starting from `x0`.
    ///
    /// `f0`, when given, is taken as `f(x0)` and costs no evaluation.
    pub fn minimize<F>(&self, f: F, x0: &[f64], f0: Option<f64>, lower: &[f64], upper: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let dim = x0.len();
        assert!(lower.len() == dim && upper.len() == dim);
        let mut run = Budgeted {
            f,
            lower,
            upper,
            left: self.max_evals,
            evals: 0,
            best: (x0.to_vec(), f64::INFINITY),
        };
        let mut start = x0.to_vec();
        run.project(&mut start);
        let v0 = match f0 {
            Some(v) => {
                run.best = (start.clone(), v);
                v
            }
            None => match run.eval(start.clone()) {
                Some((_, v)) => v,
                None => return finish(run),
            },
        };

        let mut simplex = vec![(start.clone(), v0)];
        for i in 0..dim {
            let mut p = start.clone();
            p[i] += self.initial_step;
            if p[i] > upper[i] {
                p[i] = start[i] - self.initial_step;
            }
            match run.eval(p) {
                Some(v) => simplex.push(v),
                None => return finish(run),
            }
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[dim].1 - simplex[0].1;
            let size = simplex[1..]
                .iter()
                .flat_map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if size < 1e-12 && spread.abs() < 1e-15 {
                break;
            }
            let centroid: Vec<f64> = (0..dim)
                .map(|i| simplex[..dim].iter().map(|(p, _)| p[i]).sum::<f64>() / dim as f64)
                .collect();
            let worst = simplex[dim].clone();
            let along = |t: f64, from: &[f64]| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(from)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };

            let Some(reflected) = run.eval(along(-self.reflection, &worst.0)) else { break };
            if reflected.1 < simplex[0].1 {
                let Some(expanded) = run.eval(along(-self.reflection * self.expansion, &worst.0)) else {
                    simplex[dim] = reflected;
                    break;
                };
                simplex[dim] = if expanded.1 < reflected.1 { expanded } else { reflected };
                continue;
            }
            if reflected.1 < simplex[dim - 1].1 {
                simplex[dim] = reflected;
                continue;
            }
            let (target, outside) = if reflected.1 < worst.1 {
                (along(-self.reflection * self.contraction, &worst.0), true)
            } else {
                (along(self.contraction, &worst.0), false)
            };
            let Some(contracted) = run.eval(target) else { break };
            let accept = if outside {
                contracted.1 <= reflected.1
            } else {
                contracted.1 < worst.1
            };
            if accept {
                simplex[dim] = contracted;
                continue;
            }
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let p: Vec<f64> = best
                    .iter()
                    .zip(&vertex.0)
                    .map(|(b, v)| b + self.shrink * (v - b))
                    .collect();
                match run.eval(p) {
                    Some(v) => *vertex = v,
                    None => return finish(run),
                }
            }
        }
        finish(run)
    }
}

fn finish<F>(run: Budgeted<'_, F>) -> Minimum {
    Minimum {
        x: run.best.0,
        value: run.best.1,
        evals: run.evals,
    }
}
