//! Independent scalar binary-BEC oracle used by the integration tests.
//!
//! Everything here works on plain erasure probabilities with ordinary
//! polynomial arithmetic, no coefficient tensors and no shared code with
//! the library's DE path, so it can serve as ground truth at m = 1.
#![allow(dead_code)]

/// Edge-perspective polynomial value `sum_d c_d x^(d-1)`.
pub fn eval_edge(coeffs: &[(usize, f64)], x: f64) -> f64 {
    coeffs.iter().map(|&(d, c)| c * x.powi(d as i32 - 1)).sum()
}

/// Node-perspective polynomial value `sum_d c_d x^d`.
pub fn eval_node(coeffs: &[(usize, f64)], x: f64) -> f64 {
    coeffs.iter().map(|&(d, c)| c * x.powi(d as i32)).sum()
}

/// Node-perspective coefficients derived from edge-perspective ones.
pub fn node_coeffs(edge: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let norm: f64 = edge.iter().map(|&(d, c)| c / d as f64).sum();
    edge.iter()
        .map(|&(d, c)| (d, c / d as f64 / norm))
        .collect()
}

/// Average degree `P'(1) = 1 / sum_d c_d / d` of the edge polynomial.
pub fn avg_degree(edge: &[(usize, f64)]) -> f64 {
    1.0 / edge.iter().map(|&(d, c)| c / d as f64).sum::<f64>()
}

/// Scalar DE ensemble description.
pub struct ScalarEnsemble {
    pub lambda: Vec<(usize, f64)>,
    pub rho: Vec<(usize, f64)>,
}

impl ScalarEnsemble {
    pub fn regular(dv: usize, dc: usize) -> Self {
        ScalarEnsemble {
            lambda: vec![(dv, 1.0)],
            rho: vec![(dc, 1.0)],
        }
    }

    /// One scalar DE update `x' = eps λ(1 - ρ(1 - x))`.
    pub fn step(&self, x: f64, eps: f64) -> f64 {
        eps * eval_edge(&self.lambda, 1.0 - eval_edge(&self.rho, 1.0 - x))
    }

    /// Forward iteration from x = 1 until the step size drops below `tol`.
    pub fn forward_fp(&self, eps: f64, tol: f64, max_iter: usize) -> f64 {
        let mut x = 1.0;
        for _ in 0..max_iter {
            let next = self.step(x, eps);
            let done = (next - x).abs() <= tol;
            x = next;
            if done {
                break;
            }
        }
        x
    }

    /// BP threshold by bisection on decode success.
    pub fn bp_threshold(&self, eps_tol: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > eps_tol {
            let mid = 0.5 * (lo + hi);
            if self.forward_fp(mid, 1e-10, 100_000) < 1e-7 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Scalar potential: the four entropy terms of the nonbinary potential
    /// collapse at m = 1 to
    /// `(L'/R')(1 - R(1-x)) + L' y - L'(x + y - xy) - eps L(y)`
    /// with `y = 1 - ρ(1-x)`.
    pub fn potential(&self, x: f64, eps: f64) -> f64 {
        let lp1 = avg_degree(&self.lambda);
        let rp1 = avg_degree(&self.rho);
        let big_l = node_coeffs(&self.lambda);
        let big_r = node_coeffs(&self.rho);
        let y = 1.0 - eval_edge(&self.rho, 1.0 - x);
        lp1 / rp1 * (1.0 - eval_node(&big_r, 1.0 - x)) + lp1 * y
            - lp1 * (x + y - x * y)
            - eps * eval_node(&big_l, y)
    }

    /// All fixed points in (0, 1]: sign changes of `step(x) - x` on a fine
    /// grid, each refined by bisection.
    pub fn nontrivial_fixed_points(&self, eps: f64) -> Vec<f64> {
        let g = |x: f64| self.step(x, eps) - x;
        let n = 40_000;
        let mut roots = Vec::new();
        for i in 1..n {
            let a = i as f64 / n as f64;
            let b = (i + 1) as f64 / n as f64;
            if g(a) == 0.0 {
                roots.push(a);
            } else if g(a) * g(b) < 0.0 {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if g(lo) * g(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        roots
    }

    /// Minimum potential over the nontrivial fixed points, +inf if none.
    pub fn energy_gap(&self, eps: f64) -> f64 {
        self.nontrivial_fixed_points(eps)
            .iter()
            .map(|&x| self.potential(x, eps))
            .fold(f64::INFINITY, f64::min)
    }

    /// Potential threshold by bisection on the sign of the energy gap.
    pub fn potential_threshold(&self, eps_tol: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > eps_tol {
            let mid = 0.5 * (lo + hi);
            if self.energy_gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// One synchronous sweep of the scalar coupled chain: erasure value
    /// `x_i' = (1/w) sum_k eps_{i-k} λ((1/w) sum_j (1 - ρ(1 - x_{i-k+j})))`
    /// with zero erasure outside the chain.
    pub fn coupled_step(&self, x: &[f64], eps: f64, n: usize, w: usize) -> Vec<f64> {
        let n_w = n + w - 1;
        assert_eq!(x.len(), n_w);
        let get = |i: isize| -> f64 {
            if (0..n_w as isize).contains(&i) {
                x[i as usize]
            } else {
                0.0
            }
        };
        (0..n_w as isize)
            .map(|i| {
                let mut acc = 0.0;
                for k in 0..w as isize {
                    let v = i - k;
                    if !(0..n as isize).contains(&v) {
                        continue; // channel is perfect there
                    }
                    let mut avg = 0.0;
                    for j in 0..w as isize {
                        avg += 1.0 - eval_edge(&self.rho, 1.0 - get(v + j));
                    }
                    avg /= w as f64;
                    acc += eps * eval_edge(&self.lambda, avg);
                }
                acc / w as f64
            })
            .collect()
    }
}
