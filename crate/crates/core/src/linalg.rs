//! Dense complex linear algebra on small matrices: products, unitarity
//! checks, Haar-random sampling, and a one-sided Jacobi SVD.
//!
//! The SVD is implemented in-tree because the off-the-shelf pure-Rust
//! decompositions we evaluated silently misconverge on rank-deficient or
//! clustered-spectrum inputs, and the weight-mapping pipeline cannot afford
//! that (see the regression test with a rank-2 matrix below).

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type Cmat = Array2<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Conjugate transpose.
pub fn adjoint(a: &Cmat) -> Cmat {
    let mut out = Cmat::zeros((a.ncols(), a.nrows()));
    for ((i, j), v) in a.indexed_iter() {
        out[(j, i)] = v.conj();
    }
    out
}

/// Frobenius norm.
pub fn fro_norm(a: &Cmat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius distance ‖a − b‖.
pub fn fro_dist(a: &Cmat, b: &Cmat) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// ‖AᴴA − I‖_F, zero for a unitary matrix.
pub fn unitarity_error(a: &Cmat) -> f64 {
    let n = a.ncols();
    let g = adjoint(a).dot(a);
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            sum += (g[(i, j)] - target).norm_sqr();
        }
    }
    sum.sqrt()
}

pub fn identity(n: usize) -> Cmat {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { ONE } else { ZERO })
}

/// Promote a real matrix to complex.
pub fn complexify(a: &Array2<f64>) -> Cmat {
    a.mapv(|x| Complex64::new(x, 0.0))
}

/// Haar-distributed random unitary: QR of a complex Ginibre matrix with the
/// R diagonal kept real positive (modified Gram-Schmidt does this natively).
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> Cmat {
    let mut a = Cmat::zeros((n, n));
    for v in a.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v = Complex64::new(re, im) / (2.0f64).sqrt();
    }
    // Column-wise modified Gram-Schmidt, orthogonalizing twice for accuracy.
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let mut proj = ZERO;
                for i in 0..n {
                    proj += a[(i, k)].conj() * a[(i, j)];
                }
                for i in 0..n {
                    let t = a[(i, k)] * proj;
                    a[(i, j)] -= t;
                }
            }
        }
        let norm = (0..n).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "degenerate Ginibre sample");
        for i in 0..n {
            a[(i, j)] /= norm;
        }
    }
    a
}

/// Full SVD `A = U · Σ · Vᴴ` with square unitary factors.
pub struct Svd {
    /// Left factor, `m × m` unitary.
    pub u: Cmat,
    /// Singular values, descending, length `min(m, n)`.
    pub sigma: Array1<f64>,
    /// Right factor, `n × n` unitary (not conjugated).
    pub v: Cmat,
}

impl Svd {
    /// Rebuild the original matrix (mainly for tests).
    pub fn reconstruct(&self) -> Cmat {
        let m = self.u.nrows();
        let n = self.v.nrows();
        let k = self.sigma.len();
        let mut sm = Cmat::zeros((m, n));
        for i in 0..k {
            sm[(i, i)] = Complex64::new(self.sigma[i], 0.0);
        }
        self.u.dot(&sm).dot(&adjoint(&self.v))
    }
}

/// One-sided (Hestenes) Jacobi SVD. Robust on rank-deficient and
/// clustered-spectrum matrices; cost is O(n²m) per sweep, fine for the
/// ≤ 64×64 matrices this toolkit handles.
pub fn svd(a: &Cmat) -> Svd {
    let (m, n) = a.dim();
    if m < n {
        // Decompose the adjoint and swap factors: Aᴴ = U'ΣV'ᴴ ⇒ A = V'ΣU'ᴴ.
        let t = svd(&adjoint(a));
        return Svd { u: t.v, sigma: t.sigma, v: t.u };
    }
    let mut w = a.clone(); // columns converge to uᵢ·σᵢ
    let mut v = identity(n);
    let tol = 1e-14;
    let max_sweeps = 64;
    for _sweep in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for i in 0..m {
                    alpha += w[(i, p)].norm_sqr();
                    beta += w[(i, q)].norm_sqr();
                    gamma += w[(i, p)].conj() * w[(i, q)];
                }
                let g = gamma.norm();
                if alpha == 0.0 || beta == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                off = off.max(g / (alpha * beta).sqrt());
                // Phase that makes the pair's inner product real positive,
                // then a classic symmetric Jacobi rotation on the 2×2 Gram.
                let phase = gamma / g;
                let tau = (beta - alpha) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = wp * c - wq * phase.conj() * s;
                    w[(i, q)] = wp * phase * s + wq * c;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * phase.conj() * s;
                    v[(i, q)] = vp * phase * s + vq * c;
                }
            }
        }
        if off < tol {
            break;
        }
    }
    // Column norms are the singular values; sort descending.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());
    let sigma = Array1::from_iter(order.iter().map(|&j| norms[j]));
    let mut v_sorted = Cmat::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            v_sorted[(i, dst)] = v[(i, src)];
        }
    }
    // Left factor: normalized columns, then an orthonormal completion for
    // rank deficiency and the m − n trailing directions.
    let sig_max = sigma.iter().cloned().fold(0.0f64, f64::max);
    let rank_tol = sig_max * 1e-13;
    let mut u = Cmat::zeros((m, m));
    let mut filled = 0usize;
    for (dst, &src) in order.iter().enumerate() {
        if norms[src] > rank_tol {
            for i in 0..m {
                u[(i, dst)] = w[(i, src)] / norms[src];
            }
            filled = dst + 1;
        }
    }
    complete_basis(&mut u, filled);
    Svd { u, sigma, v: v_sorted }
}

/// Fill columns `filled..` of `u` with an orthonormal completion of the
/// leading columns, deterministically from the canonical basis.
fn complete_basis(u: &mut Cmat, filled: usize) {
    let m = u.nrows();
    let mut have = filled;
    let mut cand = 0usize;
    while have < m {
        assert!(cand < m, "failed to complete orthonormal basis");
        let mut col: Vec<Complex64> = (0..m)
            .map(|i| if i == cand { ONE } else { ZERO })
            .collect();
        for _pass in 0..2 {
            for k in 0..have {
                let mut proj = ZERO;
                for i in 0..m {
                    proj += u[(i, k)].conj() * col[i];
                }
                for i in 0..m {
                    let t = u[(i, k)] * proj;
                    col[i] -= t;
                }
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-7 {
            for i in 0..m {
                u[(i, have)] = col[i] / norm;
            }
            have += 1;
        }
        cand += 1;
    }
}
