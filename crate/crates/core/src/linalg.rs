//! Small dense complex linear algebra for the fixed 3×3 eigenvalue stencil.
//!
//! Eigenvalues come from the characteristic cubic (Cardano for the dominant
//! root, then deflation), eigenvectors from cross products of the rows of
//! `A − μI`. Everything is deterministic and allocation-free.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub type Vec3 = [C64; 3];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[C64; 3]; 3]);

impl Mat3 {
    pub fn zero() -> Self {
        Mat3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn row(&self, i: usize) -> Vec3 {
        self.0[i]
    }

    pub fn col(&self, j: usize) -> Vec3 {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    pub fn mul(&self, o: &Mat3) -> Mat3 {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let mut out = [ZERO; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|k| self.0[i][k] * v[k]).sum();
        }
        out
    }

    /// Row vector times matrix, `vᵀ M`.
    pub fn vec_mul(&self, v: &Vec3) -> Vec3 {
        let mut out = [ZERO; 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|k| v[k] * self.0[k][j]).sum();
        }
        out
    }

    pub fn transpose(&self) -> Mat3 {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn conj(&self) -> Mat3 {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z = z.conj());
        m
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat3 {
        self.transpose().conj()
    }

    pub fn scale(&self, s: C64) -> Mat3 {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn add(&self, o: &Mat3) -> Mat3 {
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += o.0[i][j];
            }
        }
        m
    }

    pub fn sub(&self, o: &Mat3) -> Mat3 {
        self.add(&o.scale(-ONE))
    }

    /// `self − μ I`.
    pub fn shift(&self, mu: C64) -> Mat3 {
        let mut m = *self;
        for i in 0..3 {
            m.0[i][i] -= mu;
        }
        m
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> C64 {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Coefficients `(c2, c1, c0)` of the monic characteristic polynomial `μ³ + c2 μ² + c1 μ + c0`.
    pub fn char_poly(&self) -> (C64, C64, C64) {
        let a = &self.0;
        let minors = (a[0][0] * a[1][1] - a[0][1] * a[1][0])
            + (a[0][0] * a[2][2] - a[0][2] * a[2][0])
            + (a[1][1] * a[2][2] - a[1][2] * a[2][1]);
        (-self.trace(), minors, -self.det())
    }
}

/// Bilinear (non-conjugating) product `uᵀv`.
pub fn dot(u: &Vec3, v: &Vec3) -> C64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// Conjugate pairing `⟨u, v⟩ = Σ conj(uᵢ) vᵢ`.
pub fn inner(u: &Vec3, v: &Vec3) -> C64 {
    u[0].conj() * v[0] + u[1].conj() * v[1] + u[2].conj() * v[2]
}

pub fn norm(v: &Vec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn scale(v: &Vec3, s: C64) -> Vec3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

pub fn sub(u: &Vec3, v: &Vec3) -> Vec3 {
    [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
}

pub fn conj(v: &Vec3) -> Vec3 {
    [v[0].conj(), v[1].conj(), v[2].conj()]
}

/// Bilinear cross product (no conjugation).
pub fn cross(u: &Vec3, v: &Vec3) -> Vec3 {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

/// Scale so that the largest-modulus entry becomes exactly 1 (first index wins ties).
pub fn normalize_max_entry(v: &Vec3) -> Vec3 {
    let mut k = 0;
    for i in 1..3 {
        if v[i].norm() > v[k].norm() {
            k = i;
        }
    }
    if v[k] == ZERO {
        return *v;
    }
    let mut out = scale(v, v[k].inv());
    out[k] = ONE;
    out
}

/// Angle between two complex directions, in [0, π/2].
pub fn angle(u: &Vec3, v: &Vec3) -> f64 {
    let c = inner(u, v).norm() / (norm(u) * norm(v));
    c.clamp(0.0, 1.0).acos()
}

fn cubic_eval(c: (C64, C64, C64), z: C64) -> (C64, C64) {
    let p = ((z + c.0) * z + c.1) * z + c.2;
    let dp = (3.0 * z + 2.0 * c.0) * z + c.1;
    (p, dp)
}

/// Newton polish that only accepts residual-reducing updates.
fn polish(c: (C64, C64, C64), mut z: C64) -> C64 {
    let mut res = cubic_eval(c, z).0.norm();
    for _ in 0..8 {
        let (p, dp) = cubic_eval(c, z);
        if dp.norm() == 0.0 || res == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let r = cubic_eval(c, cand).0.norm();
        if !(r < res) {
            break;
        }
        z = cand;
        res = r;
    }
    z
}

/// Roots of `z² + b z + c`, computed without cancellation.
pub fn quadratic_roots(b: C64, c: C64) -> [C64; 2] {
    let d = (b * b - 4.0 * c).sqrt();
    let q = if (b + d).norm() >= (b - d).norm() { -(b + d) / 2.0 } else { -(b - d) / 2.0 };
    if q == ZERO {
        return [ZERO, ZERO];
    }
    [q, c / q]
}

/// Roots of the monic cubic `z³ + c2 z² + c1 z + c0`.
pub fn cubic_roots(c2: C64, c1: C64, c0: C64) -> [C64; 3] {
    let c = (c2, c1, c0);
    let shift = c2 / 3.0;
    let p = c1 - c2 * shift;
    let q = 2.0 * shift * shift * shift - shift * c1 + c0;
    let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let w = if (-q / 2.0 + s).norm() >= (-q / 2.0 - s).norm() { -q / 2.0 + s } else { -q / 2.0 - s };
    let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let u = if w == ZERO { ZERO } else { w.powf(1.0 / 3.0) };
    let mut cands = [ZERO; 3];
    let mut rot = ONE;
    for cand in cands.iter_mut() {
        let uk = u * rot;
        let vk = if uk == ZERO { ZERO } else { -p / (3.0 * uk) };
        *cand = uk + vk - shift;
        rot *= omega;
    }
    let mut r = cands[0];
    for z in &cands[1..] {
        if z.norm() > r.norm() {
            r = *z;
        }
    }
    let r = polish(c, r);
    if r == ZERO {
        // All roots vanish only if the whole polynomial is z³.
        let [a, b] = quadratic_roots(c2, c1);
        return [a, b, ZERO];
    }
    // Backward deflation is stable when removing the largest root.
    let b0 = -c0 / r;
    let b1 = (b0 - c1) / r;
    let [s1, s2] = quadratic_roots(b1, b0);
    [r, polish(c, s1), polish(c, s2)]
}

fn eig2(a: C64, b: C64, c: C64, d: C64) -> [C64; 2] {
    quadratic_roots(-(a + d), a * d - b * c)
}

/// Eigenvalues of a 3×3 matrix, exploiting exact block-triangular structure.
pub fn eigenvalues(m: &Mat3) -> [C64; 3] {
    let a = &m.0;
    if a[2][0] == ZERO && a[2][1] == ZERO {
        let [x, y] = eig2(a[0][0], a[0][1], a[1][0], a[1][1]);
        return [x, y, a[2][2]];
    }
    if a[1][0] == ZERO && a[2][0] == ZERO {
        let [x, y] = eig2(a[1][1], a[1][2], a[2][1], a[2][2]);
        return [a[0][0], x, y];
    }
    let (c2, c1, c0) = m.char_poly();
    cubic_roots(c2, c1, c0)
}

fn null_from_rows(r: [Vec3; 3]) -> Vec3 {
    let cands = [cross(&r[0], &r[1]), cross(&r[0], &r[2]), cross(&r[1], &r[2])];
    let mut best = cands[0];
    for c in &cands[1..] {
        if norm(c) > norm(&best) {
            best = *c;
        }
    }
    let scale_ref = r.iter().map(norm).fold(0.0, f64::max);
    if norm(&best) > 1e-14 * scale_ref * scale_ref && norm(&best) > 0.0 {
        return best;
    }
    // Rank ≤ 1: any vector annihilated by the dominant row.
    let mut k = 0;
    for i in 1..3 {
        if norm(&r[i]) > norm(&r[k]) {
            k = i;
        }
    }
    let row = r[k];
    if norm(&row) == 0.0 {
        return [ONE, ZERO, ZERO];
    }
    let mut j = 0;
    for i in 1..3 {
        if row[i].norm() > row[j].norm() {
            j = i;
        }
    }
    let i = if j == 0 { 1 } else { 0 };
    let mut v = [ZERO; 3];
    v[i] = row[j];
    v[j] = -row[i];
    v
}

/// Right eigenvector of `m` for eigenvalue `mu` (unnormalized).
pub fn eigenvector(m: &Mat3, mu: C64) -> Vec3 {
    let s = m.shift(mu);
    null_from_rows([s.row(0), s.row(1), s.row(2)])
}

/// Left eigenvector `l` with `lᵀ m = μ lᵀ` (unnormalized, bilinear convention).
pub fn left_eigenvector(m: &Mat3, mu: C64) -> Vec3 {
    let s = m.shift(mu);
    null_from_rows([s.col(0), s.col(1), s.col(2)])
}

/// `|(A − μ) v| / (|A| |v|)`.
pub fn eig_residual(m: &Mat3, mu: C64, v: &Vec3) -> f64 {
    let r = m.shift(mu).mul_vec(v);
    norm(&r) / ((m.norm() + mu.norm()).max(1e-300) * norm(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cubic_roots_of_known_polynomial() {
        // (z-1)(z-2i)(z+3) = z³ + (2-2i) z² + (-3-4i) z + 6i
        let r = cubic_roots(c(2.0, -2.0), c(-3.0, -4.0), c(0.0, 6.0));
        for want in [c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)] {
            assert!(r.iter().any(|z| (z - want).norm() < 1e-13), "{want} missing in {r:?}");
        }
    }

    #[test]
    fn widely_separated_roots_keep_relative_accuracy() {
        // roots 1e-8, -2e-8 and -5
        let roots = [c(1e-8, 0.0), c(-2e-8, 0.0), c(-5.0, 0.0)];
        let c2 = -(roots[0] + roots[1] + roots[2]);
        let c1 = roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2];
        let c0 = -(roots[0] * roots[1] * roots[2]);
        let r = cubic_roots(c2, c1, c0);
        for want in roots {
            assert!(r.iter().any(|z| (z - want).norm() <= 1e-12 * want.norm()), "{want} in {r:?}");
        }
    }

    #[test]
    fn eigenpairs_of_general_matrix() {
        let m = Mat3([
            [c(1.0, 0.5), c(2.0, 0.0), c(0.0, 1.0)],
            [c(-1.0, 0.0), c(0.5, 0.0), c(3.0, -1.0)],
            [c(0.2, 0.0), c(1.0, 1.0), c(-2.0, 0.0)],
        ]);
        let ev = eigenvalues(&m);
        let sum: C64 = ev.iter().sum();
        assert!((sum - m.trace()).norm() < 1e-12);
        for mu in ev {
            let v = eigenvector(&m, mu);
            assert!(eig_residual(&m, mu, &v) < 1e-13);
            let l = left_eigenvector(&m, mu);
            let r = sub(&m.vec_mul(&l), &scale(&l, mu));
            assert!(norm(&r) < 1e-12 * norm(&l) * m.norm());
        }
    }

    #[test]
    fn triangular_structure_gives_exact_diagonal() {
        let lam = c(0.3, 2.0);
        let m = Mat3([
            [ZERO, lam, ONE],
            [ZERO, ZERO, ONE],
            [ZERO, ZERO, -ONE - lam],
        ]);
        let ev = eigenvalues(&m);
        assert_eq!(ev[2], -ONE - lam);
        assert_eq!(ev[0], ZERO);
        assert_eq!(ev[1], ZERO);
    }

    #[test]
    fn normalization_sets_dominant_entry_to_one() {
        let v = normalize_max_entry(&[c(0.1, 0.0), c(0.0, -3.0), c(1.0, 1.0)]);
        assert_eq!(v[1], ONE);
        assert!((v[2] - c(1.0, 1.0) / c(0.0, -3.0)).norm() < 1e-15);
    }

    #[test]
    fn cross_product_is_orthogonal_bilinearly() {
        let u = [c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.5)];
        let v = [c(-1.0, 0.0), c(2.0, 2.0), c(0.0, 1.0)];
        let w = cross(&u, &v);
        assert!(dot(&w, &u).norm() < 1e-14);
        assert!(dot(&w, &v).norm() < 1e-14);
    }
}
