use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot, norm, Vector};

use super::{LinearSolveReport, SolveMethod};

fn residual(apply_a: &impl Fn(&[f64]) -> Vec<f64>, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = apply_a(x);
    axpy(-1.0, b, &mut r);
    r
}

fn curvature_check(iteration: usize, curvature: f64) -> Result<()> {
    if curvature > 0.0 {
        Ok(())
    } else {
        Err(Error::NonSpdOperator {
            iteration,
            curvature,
        })
    }
}

/// Conjugate gradient for `Ax = b`, stopping when `‖Ax_k − b‖ ≤ tol` or after
/// `max_iters` iterations.
pub fn cg(
    apply_a: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<LinearSolveReport> {
    check_dim(b.len(), x0.len())?;
    if !(tol > 0.0) {
        return Err(Error::invalid("cg tolerance must be positive"));
    }
    let mut x = x0.to_vec();
    let mut r = residual(&apply_a, &x, b);
    let mut p: Vec<f64> = r.iter().map(|v| -v).collect();
    let mut rr = dot(&r, &r);
    let mut k = 0;
    while rr.sqrt() > tol && k < max_iters {
        let ap = apply_a(&p);
        let pap = dot(&p, &ap);
        curvature_check(k, pap)?;
        let step = rr / pap;
        axpy(step, &p, &mut x);
        axpy(step, &ap, &mut r);
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = -ri + beta * *pi);
        rr = rr_next;
        k += 1;
    }
    finish(&apply_a, x, b, k, rr.sqrt(), SolveMethod::Cg)
}

/// Preconditioned conjugate gradient running exactly `iters` iterations
/// (fewer only if the residual vanishes). `precond_solve` applies `P⁻¹`.
pub fn pcg(
    apply_a: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: &[f64],
    iters: usize,
    precond_solve: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<LinearSolveReport> {
    let (x, r, k) = pcg_core(&apply_a, b, x0, iters, precond_solve)?;
    finish(&apply_a, x, b, k, norm(&r), SolveMethod::Pcg)
}

/// Returns the iterate, the recurrence residual and the iteration count.
pub(crate) fn pcg_core(
    apply_a: &impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: &[f64],
    iters: usize,
    precond_solve: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    check_dim(b.len(), x0.len())?;
    if iters < 1 {
        return Err(Error::invalid("pcg needs at least one iteration"));
    }
    let mut x = x0.to_vec();
    let mut r = residual(apply_a, &x, b);
    let mut y = precond_solve(&r);
    let mut p: Vec<f64> = y.iter().map(|v| -v).collect();
    let mut ry = dot(&r, &y);
    let mut k = 0;
    while k < iters {
        if ry == 0.0 {
            break;
        }
        let ap = apply_a(&p);
        let pap = dot(&p, &ap);
        curvature_check(k, pap)?;
        // step length r·y / pᵀAp; with r·r the iteration is not a Krylov
        // method in the P-inner product and a perfect preconditioner does not
        // terminate in one step
        let step = ry / pap;
        axpy(step, &p, &mut x);
        axpy(step, &ap, &mut r);
        y = precond_solve(&r);
        let ry_next = dot(&r, &y);
        let beta = ry_next / ry;
        p.iter_mut().zip(&y).for_each(|(pi, yi)| *pi = -yi + beta * *pi);
        ry = ry_next;
        k += 1;
    }
    Ok((x, r, k))
}

fn finish(
    apply_a: &impl Fn(&[f64]) -> Vec<f64>,
    x: Vec<f64>,
    b: &[f64],
    iterations: usize,
    recurrence_residual_norm: f64,
    method: SolveMethod,
) -> Result<LinearSolveReport> {
    let final_residual_norm = norm(&residual(apply_a, &x, b));
    Ok(LinearSolveReport {
        solution: Vector::new(x)?,
        iterations,
        final_residual_norm,
        recurrence_residual_norm,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_matvec;

    fn diag(d: Vec<f64>) -> impl Fn(&[f64]) -> Vec<f64> {
        move |x| x.iter().zip(&d).map(|(a, b)| a * b).collect()
    }

    #[test]
    fn identity_one_iteration() {
        let rep = cg(|x| x.to_vec(), &[1.0, -2.0, 3.0], &[0.0; 3], 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.solution.as_slice(), &[1.0, -2.0, 3.0]);
    }

    #[test]
    fn two_distinct_eigenvalues() {
        let rep = cg(diag(vec![1.0, 4.0]), &[1.0, 4.0], &[0.0; 2], 1e-12, 10).unwrap();
        assert!(rep.iterations <= 2);
        for v in rep.solution.iter() {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_needs_no_iterations() {
        let rep = cg(diag(vec![2.0, 3.0]), &[0.0; 2], &[0.0; 2], 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 0);
        let rep = pcg(diag(vec![2.0, 3.0]), &[0.0; 2], &[0.0; 2], 5, |r| r.to_vec()).unwrap();
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn indefinite_operator_detected() {
        let err = cg(diag(vec![1.0, -1.0]), &[0.0, 1.0], &[0.0; 2], 1e-12, 10).unwrap_err();
        assert!(matches!(err, Error::NonSpdOperator { iteration: 0, .. }));
    }

    #[test]
    fn perfect_preconditioner() {
        let a = vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let chol = crate::linalg::Cholesky::factor(&a, 3).unwrap();
        let b = [1.0, 2.0, 3.0];
        let rep = pcg(|x| sym_matvec(&a, 3, x), &b, &[0.0; 3], 1, |r| chol.solve(r)).unwrap();
        let exact = chol.solve(&b);
        for (u, v) in rep.solution.iter().zip(&exact) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_preconditioner_matches_cg() {
        let a = vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let b = [1.0, -1.0, 0.5];
        for t in 1..=3 {
            let p = pcg(|x| sym_matvec(&a, 3, x), &b, &[0.0; 3], t, |r| r.to_vec()).unwrap();
            let c = cg(|x| sym_matvec(&a, 3, x), &b, &[0.0; 3], 1e-300, t).unwrap();
            for (u, v) in p.solution.iter().zip(c.solution.iter()) {
                assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(cg(|x| x.to_vec(), &[1.0], &[0.0], 0.0, 3).is_err());
        assert!(cg(|x| x.to_vec(), &[1.0], &[0.0, 0.0], 1e-8, 3).is_err());
        assert!(pcg(|x| x.to_vec(), &[1.0], &[0.0], 0, |r| r.to_vec()).is_err());
    }
}
