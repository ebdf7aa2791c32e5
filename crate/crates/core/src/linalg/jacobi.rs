//! Jacobi rotations: two-sided for Hermitian eigenproblems, one-sided
//! (Hestenes) for singular value decompositions.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;

const MAX_SWEEPS: usize = 100;

/// Unitary `G` (entries `[g00, g01, g10, g11]`) with `G^H [[a, z], [conj z, b]] G` diagonal.
fn rotation(a: f64, b: f64, z: Complex64) -> [Complex64; 4] {
    let r = z.norm();
    let phase = if r > 0.0 { z.conj() / r } else { Complex64::new(1.0, 0.0) };
    let theta = 0.5 * (2.0 * r).atan2(a - b);
    let (s, c) = theta.sin_cos();
    [
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        phase * s,
        phase * c,
    ]
}

/// Eigenvalues (descending) and eigenvectors (as columns of a unitary matrix)
/// of a Hermitian matrix by cyclic Jacobi sweeps.
pub(crate) fn eigen_hermitian(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = a[(p, q)];
                if z.norm() <= 1e-18 * scale {
                    continue;
                }
                let g = rotation(a[(p, p)].re, a[(q, q)].re, z);
                // A <- A G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g[0] + akq * g[2];
                    a[(k, q)] = akp * g[1] + akq * g[3];
                }
                // A <- G^H A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g[0].conj() * apk + g[2].conj() * aqk;
                    a[(q, k)] = g[1].conj() * apk + g[3].conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g[0] + vkq * g[2];
                    v[(k, q)] = vkp * g[1] + vkq * g[3];
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Thin SVD of an `m x n` matrix given as `n` columns of length `m`.
pub(crate) struct ColumnSvd {
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    /// Left singular vectors for nonzero singular values (zero vectors otherwise).
    pub u: Vec<Vec<Complex64>>,
    /// Right singular vectors, `n` columns of length `n`.
    pub v: Vec<Vec<Complex64>>,
}

pub(crate) fn hestenes_svd(columns: &[Vec<Complex64>]) -> ColumnSvd {
    let n = columns.len();
    let mut w: Vec<Vec<Complex64>> = columns.to_vec();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = w[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = w[p].iter().zip(&w[q]).map(|(x, y)| x.conj() * y).sum();
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                let g = rotation(alpha, beta, gamma);
                for cols in [&mut w, &mut v] {
                    let (left, right) = cols.split_at_mut(q);
                    for (xp, xq) in left[p].iter_mut().zip(right[0].iter_mut()) {
                        let (a, b) = (*xp, *xq);
                        *xp = a * g[0] + b * g[2];
                        *xq = a * g[1] + b * g[3];
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let u = order
        .iter()
        .map(|&i| {
            if norms[i] > 0.0 {
                w[i].iter().map(|z| z / norms[i]).collect()
            } else {
                vec![Complex64::new(0.0, 0.0); w[i].len()]
            }
        })
        .collect();
    let v = order.iter().map(|&i| v[i].clone()).collect();
    ColumnSvd { sigma, u, v }
}
