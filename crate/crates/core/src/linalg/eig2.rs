use num_complex::Complex64;

/// Closed-form eigen-analysis of a real 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigs2x2 {
    /// Roots of the characteristic polynomial, largest modulus first.
    pub roots: [Complex64; 2],
    /// `‖S‖·‖S⁻¹‖` for the matrix `S` of unit-norm eigenvectors. Infinite
    /// when the matrix is defective.
    pub c1: f64,
    pub defective: bool,
}

impl Eigs2x2 {
    pub fn dominant_modulus(&self) -> f64 {
        self.roots[0].norm()
    }
}

/// Eigenvalues and eigenvector conditioning of `t` (row-major).
///
/// A discriminant within a few ulps of zero is treated as a double root.
/// The double root is defective unless `t` is a multiple of the identity.
pub fn eigs_2x2(t: [[f64; 2]; 2]) -> Eigs2x2 {
    let tr = t[0][0] + t[1][1];
    let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    let disc = tr * tr - 4.0 * det;
    let scale = tr * tr + 4.0 * det.abs();
    let snap = 64.0 * f64::EPSILON * scale;

    if disc.abs() <= snap {
        let root = Complex64::new(tr / 2.0, 0.0);
        let mag = t.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let scalar = t[0][1].abs() <= 1e-12 * mag
            && t[1][0].abs() <= 1e-12 * mag
            && (t[0][0] - t[1][1]).abs() <= 1e-12 * mag;
        return Eigs2x2 {
            roots: [root, root],
            c1: if scalar { 1.0 } else { f64::INFINITY },
            defective: !scalar,
        };
    }

    let (r1, r2) = if disc > 0.0 {
        let sq = disc.sqrt();
        let big = 0.5 * (tr + tr.signum() * sq);
        let small = if big != 0.0 { det / big } else { 0.5 * (tr - tr.signum() * sq) };
        (Complex64::new(big, 0.0), Complex64::new(small, 0.0))
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(tr / 2.0, im), Complex64::new(tr / 2.0, -im))
    };
    let (r1, r2) = if r1.norm() >= r2.norm() { (r1, r2) } else { (r2, r1) };

    let v1 = eigenvector(t, r1);
    let v2 = eigenvector(t, r2);
    // Unit columns: SᴴS = [[1, g],[ḡ, 1]] with eigenvalues 1 ± |g|.
    let g = (v1[0].conj() * v2[0] + v1[1].conj() * v2[1]).norm().min(1.0);
    let c1 = if g >= 1.0 {
        f64::INFINITY
    } else {
        ((1.0 + g) / (1.0 - g)).sqrt()
    };
    Eigs2x2 {
        roots: [r1, r2],
        c1,
        defective: false,
    }
}

fn eigenvector(t: [[f64; 2]; 2], a: Complex64) -> [Complex64; 2] {
    let c = |x: f64| Complex64::new(x, 0.0);
    let cand1 = [c(t[0][1]), a - t[0][0]];
    let cand2 = [a - t[1][1], c(t[1][0])];
    let n1 = (cand1[0].norm_sqr() + cand1[1].norm_sqr()).sqrt();
    let n2 = (cand2[0].norm_sqr() + cand2[1].norm_sqr()).sqrt();
    let (v, n) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
    [v[0] / n, v[1] / n]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn companion(pi: f64, theta: f64) -> [[f64; 2]; 2] {
        [[(1.0 + theta) * pi, -theta * pi], [1.0, 0.0]]
    }

    #[test]
    fn diagonal_case() {
        let e = eigs_2x2([[1.0, 0.0], [0.0, 0.5]]);
        assert_eq!(e.roots[0].re, 1.0);
        assert_eq!(e.roots[1].re, 0.5);
        assert!((e.c1 - 1.0).abs() < 1e-15);
        assert!(!e.defective);
    }

    #[test]
    fn double_root_is_defective() {
        // a² − a + 0.25 = (a − 0.5)²
        let e = eigs_2x2(companion(0.75, 1.0 / 3.0));
        assert!(e.defective);
        assert!((e.roots[0].re - 0.5).abs() < 1e-12);
        assert!(e.c1.is_infinite());
    }

    #[test]
    fn optimal_momentum_root() {
        let s = 0.5_f64.sqrt();
        let theta = (1.0 - s) / (1.0 + s);
        let e = eigs_2x2(companion(0.5, theta));
        assert!((e.dominant_modulus() - (1.0 - s)).abs() < 1e-10);
    }

    #[test]
    fn scalar_matrix_is_not_defective() {
        let e = eigs_2x2([[2.0, 0.0], [0.0, 2.0]]);
        assert!(!e.defective);
        assert_eq!(e.c1, 1.0);
    }

    #[test]
    fn complex_roots_satisfy_polynomial() {
        let t = [[0.3, -0.8], [1.0, 0.1]];
        let e = eigs_2x2(t);
        let tr = 0.4;
        let det = 0.03 + 0.8;
        for r in e.roots {
            assert!((r * r - r * tr + det).norm() < 1e-12);
        }
        assert!(e.c1.is_finite() && e.c1 >= 1.0);
    }
}
