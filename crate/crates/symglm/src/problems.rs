//! The four Hamiltonian benchmark systems, with exact initial data,
//! analytic gradients and Hessians, and the invariants monitored during
//! long runs.
//!
//! States are flat vectors ordered `[p; q]`, matching the canonical
//! structure matrix `J = [0 I; -I 0]`, so the vector field is
//! `f = J^-1 grad H = [-H_q; H_p]`.

use crate::integrator::{DomainError, OdeProblem};
use std::sync::Arc;

/// A canonical Hamiltonian system plus its experiment defaults.
#[derive(Clone)]
pub struct HamiltonianSpec {
    pub name: &'static str,
    /// Short CLI alias.
    pub alias: &'static str,
    pub dim: usize,
    pub y0: Vec<f64>,
    /// Step size of the full-length experiment.
    pub h_ref: f64,
    /// Horizon of the full-length experiment.
    pub t_ref: f64,
    /// Linear reversibility sign matrices (stored as diagonals); metadata.
    pub reversibility: Vec<Vec<f64>>,
    hamiltonian: fn(&[f64]) -> Result<f64, DomainError>,
    gradient: fn(&[f64], &mut [f64]) -> Result<(), DomainError>,
    hessian: fn(&[f64], &mut [f64]) -> Result<(), DomainError>,
    /// Further conserved quantities beyond H, by name.
    extra_invariants: Vec<(&'static str, fn(&[f64]) -> f64)>,
}

impl HamiltonianSpec {
    pub fn hamiltonian(&self, y: &[f64]) -> Result<f64, DomainError> {
        (self.hamiltonian)(y)
    }

    pub fn grad_h(&self, y: &[f64]) -> Result<Vec<f64>, DomainError> {
        let mut g = vec![0.0; self.dim];
        (self.gradient)(y, &mut g)?;
        Ok(g)
    }

    /// `f(y) = J^-1 grad H(y)` with the `[p; q]` ordering.
    pub fn vector_field(&self, y: &[f64], out: &mut [f64]) -> Result<(), DomainError> {
        let n = self.dim / 2;
        let mut g = vec![0.0; self.dim];
        (self.gradient)(y, &mut g)?;
        for i in 0..n {
            out[i] = -g[n + i]; // pdot = -H_q
            out[n + i] = g[i]; // qdot = H_p
        }
        Ok(())
    }

    /// Row-major Jacobian of the vector field, `J^-1 Hess H`.
    pub fn jacobian(&self, y: &[f64], out: &mut [f64]) -> Result<(), DomainError> {
        let d = self.dim;
        let n = d / 2;
        let mut hess = vec![0.0; d * d];
        (self.hessian)(y, &mut hess)?;
        for j in 0..d {
            for i in 0..n {
                out[i * d + j] = -hess[(n + i) * d + j];
                out[(n + i) * d + j] = hess[i * d + j];
            }
        }
        Ok(())
    }

    /// Integrator-facing problem with H (and any extra invariants)
    /// monitored.
    pub fn ode_problem(&self) -> OdeProblem {
        let spec = self.clone();
        let spec_j = self.clone();
        let spec_h = self.clone();
        let mut invariants: Vec<(String, Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>)> = vec![(
            "H".to_string(),
            Arc::new(move |y: &[f64]| spec_h.hamiltonian(y).unwrap_or(f64::NAN)),
        )];
        for (name, f) in &self.extra_invariants {
            let f = *f;
            invariants.push((name.to_string(), Arc::new(f)));
        }
        OdeProblem {
            name: self.name.to_string(),
            dim: self.dim,
            y0: self.y0.clone(),
            f: Arc::new(move |y, out| spec.vector_field(y, out)),
            jacobian: Some(Arc::new(move |y, out| spec_j.jacobian(y, out))),
            invariants,
            reversibility: self.reversibility.clone(),
        }
    }
}

fn diag(entries: &[f64]) -> Vec<f64> {
    entries.to_vec()
}

// ---------------------------------------------------------------------------
// Henon-Heiles
// ---------------------------------------------------------------------------

fn hh_hamiltonian(y: &[f64]) -> Result<f64, DomainError> {
    let (p1, p2, q1, q2) = (y[0], y[1], y[2], y[3]);
    Ok(0.5 * (p1 * p1 + p2 * p2)
        + 0.5 * (q1 * q1 + q2 * q2)
        + q1 * q2 * q2
        - q2 * q2 * q2 / 3.0)
}

fn hh_gradient(y: &[f64], g: &mut [f64]) -> Result<(), DomainError> {
    let (p1, p2, q1, q2) = (y[0], y[1], y[2], y[3]);
    g[0] = p1;
    g[1] = p2;
    g[2] = q1 + q2 * q2;
    g[3] = q2 + 2.0 * q1 * q2 - q2 * q2;
    Ok(())
}

fn hh_hessian(y: &[f64], h: &mut [f64]) -> Result<(), DomainError> {
    let (q1, q2) = (y[2], y[3]);
    h.fill(0.0);
    h[0] = 1.0; // p1 p1
    h[5] = 1.0; // p2 p2
    h[10] = 1.0; // q1 q1
    h[11] = 2.0 * q2; // q1 q2
    h[14] = 2.0 * q2; // q2 q1
    h[15] = 1.0 + 2.0 * q1 - 2.0 * q2; // q2 q2
    Ok(())
}

/// Henon-Heiles with the initial condition chosen so that H = 1/7;
/// chaotic at this energy.
pub fn henon_heiles() -> HamiltonianSpec {
    HamiltonianSpec {
        name: "henon-heiles",
        alias: "hh",
        dim: 4,
        y0: vec![(152.0f64 / 875.0).sqrt(), 0.2, 0.0, 0.3],
        h_ref: 0.25,
        t_ref: 1e6,
        reversibility: vec![],
        hamiltonian: hh_hamiltonian,
        gradient: hh_gradient,
        hessian: hh_hessian,
        extra_invariants: vec![],
    }
}

// ---------------------------------------------------------------------------
// Double pendulum
// ---------------------------------------------------------------------------

fn dp_kinetic_parts(y: &[f64]) -> (f64, f64, f64, f64, f64) {
    let (p1, p2, q1, q2) = (y[0], y[1], y[2], y[3]);
    let d = q1 - q2;
    let s = d.sin();
    let c = d.cos();
    let den = 2.0 * (1.0 + s * s);
    let num = p1 * p1 + 2.0 * p2 * p2 - 2.0 * p1 * p2 * c;
    (s, c, den, num, d)
}

fn dp_hamiltonian(y: &[f64]) -> Result<f64, DomainError> {
    let (_, _, den, num, _) = dp_kinetic_parts(y);
    Ok(num / den - y[3].cos() - 2.0 * y[2].cos())
}

fn dp_gradient(y: &[f64], g: &mut [f64]) -> Result<(), DomainError> {
    let (p1, p2, q1, q2) = (y[0], y[1], y[2], y[3]);
    let (s, c, den, num, _) = dp_kinetic_parts(y);
    let dden = 4.0 * s * c; // d(den)/d(q1 - q2)
    g[0] = (2.0 * p1 - 2.0 * p2 * c) / den;
    g[1] = (4.0 * p2 - 2.0 * p1 * c) / den;
    let h_d = 2.0 * p1 * p2 * s / den - num * dden / (den * den);
    g[2] = h_d + 2.0 * q1.sin();
    g[3] = -h_d + q2.sin();
    Ok(())
}

fn dp_hessian(y: &[f64], h: &mut [f64]) -> Result<(), DomainError> {
    let (p1, p2, q1, q2) = (y[0], y[1], y[2], y[3]);
    let (s, c, den, num, _) = dp_kinetic_parts(y);
    let den2 = den * den;
    let dden = 4.0 * s * c;
    let h_p1p1 = 2.0 / den;
    let h_p1p2 = -2.0 * c / den;
    let h_p2p2 = 4.0 / den;
    let h_p1d = 2.0 * p2 * s / den - (2.0 * p1 - 2.0 * p2 * c) * dden / den2;
    let h_p2d = 2.0 * p1 * s / den - (4.0 * p2 - 2.0 * p1 * c) * dden / den2;
    // d/dd of H_d = 2 p1 p2 s / den - num * dden / den^2.
    let h_dd = 2.0 * p1 * p2 * c / den - 16.0 * p1 * p2 * s * s * c / den2
        - 4.0 * (c * c - s * s) * num / den2
        + 32.0 * s * s * c * c * num / (den2 * den);
    h.fill(0.0);
    let d = 4;
    let set = |h: &mut [f64], i: usize, j: usize, v: f64| {
        h[i * d + j] = v;
        h[j * d + i] = v;
    };
    set(h, 0, 0, h_p1p1);
    set(h, 0, 1, h_p1p2);
    set(h, 1, 1, h_p2p2);
    set(h, 0, 2, h_p1d);
    set(h, 0, 3, -h_p1d);
    set(h, 1, 2, h_p2d);
    set(h, 1, 3, -h_p2d);
    set(h, 2, 2, h_dd + 2.0 * q1.cos());
    set(h, 2, 3, -h_dd);
    set(h, 3, 3, h_dd + q2.cos());
    Ok(())
}

/// Double pendulum; non-separable and chaotic. The initial angles are
/// 3.14 and -3.1 exactly as stated (not pi).
pub fn double_pendulum() -> HamiltonianSpec {
    HamiltonianSpec {
        name: "double-pendulum",
        alias: "dp",
        dim: 4,
        y0: vec![0.0, 0.0, 3.14, -3.1],
        h_ref: 0.01,
        t_ref: 1e4,
        reversibility: vec![
            diag(&[-1.0, -1.0, 1.0, 1.0]),
            diag(&[1.0, 1.0, -1.0, -1.0]),
        ],
        hamiltonian: dp_hamiltonian,
        gradient: dp_gradient,
        hessian: dp_hessian,
        extra_invariants: vec![],
    }
}

// ---------------------------------------------------------------------------
// Kepler
// ---------------------------------------------------------------------------

/// Positions closer to the origin than this are rejected to avoid silent
/// blowup near collision.
const KEPLER_MIN_RADIUS: f64 = 1e-8;

fn kepler_radius(y: &[f64]) -> Result<f64, DomainError> {
    let r = (y[2] * y[2] + y[3] * y[3]).sqrt();
    if r < KEPLER_MIN_RADIUS {
        return Err(DomainError(format!(
            "Kepler state within {KEPLER_MIN_RADIUS:.0e} of the collision singularity (|q| = {r:.3e})"
        )));
    }
    Ok(r)
}

fn kepler_hamiltonian(y: &[f64]) -> Result<f64, DomainError> {
    let r = kepler_radius(y)?;
    Ok(0.5 * (y[0] * y[0] + y[1] * y[1]) - 1.0 / r)
}

fn kepler_gradient(y: &[f64], g: &mut [f64]) -> Result<(), DomainError> {
    let r = kepler_radius(y)?;
    let r3 = r * r * r;
    g[0] = y[0];
    g[1] = y[1];
    g[2] = y[2] / r3;
    g[3] = y[3] / r3;
    Ok(())
}

fn kepler_hessian(y: &[f64], h: &mut [f64]) -> Result<(), DomainError> {
    let r = kepler_radius(y)?;
    let r3 = r * r * r;
    let r5 = r3 * r * r;
    h.fill(0.0);
    h[0] = 1.0;
    h[5] = 1.0;
    let (q1, q2) = (y[2], y[3]);
    h[10] = 1.0 / r3 - 3.0 * q1 * q1 / r5;
    h[11] = -3.0 * q1 * q2 / r5;
    h[14] = -3.0 * q1 * q2 / r5;
    h[15] = 1.0 / r3 - 3.0 * q2 * q2 / r5;
    Ok(())
}

fn kepler_angular_momentum(y: &[f64]) -> f64 {
    y[2] * y[1] - y[3] * y[0]
}

/// Kepler two-body problem at eccentricity 0.6; monitors both the
/// Hamiltonian and the angular momentum `L = q1 p2 - q2 p1`.
pub fn kepler() -> HamiltonianSpec {
    let e = 0.6f64;
    HamiltonianSpec {
        name: "kepler",
        alias: "kepler",
        dim: 4,
        y0: vec![0.0, ((1.0 + e) / (1.0 - e)).sqrt(), 1.0 - e, 0.0],
        h_ref: 0.01,
        t_ref: 1e4,
        reversibility: vec![
            diag(&[-1.0, -1.0, 1.0, 1.0]),
            diag(&[1.0, 1.0, -1.0, -1.0]),
            diag(&[1.0, -1.0, -1.0, 1.0]),
            diag(&[-1.0, 1.0, 1.0, -1.0]),
        ],
        hamiltonian: kepler_hamiltonian,
        gradient: kepler_gradient,
        hessian: kepler_hessian,
        extra_invariants: vec![("L", kepler_angular_momentum)],
    }
}

// ---------------------------------------------------------------------------
// Transformed Lotka-Volterra
// ---------------------------------------------------------------------------

fn tlv_hamiltonian(y: &[f64]) -> Result<f64, DomainError> {
    let (p, q) = (y[0], y[1]);
    Ok(p - p.exp() + 2.0 * q - q.exp())
}

fn tlv_gradient(y: &[f64], g: &mut [f64]) -> Result<(), DomainError> {
    g[0] = 1.0 - y[0].exp();
    g[1] = 2.0 - y[1].exp();
    Ok(())
}

fn tlv_hessian(y: &[f64], h: &mut [f64]) -> Result<(), DomainError> {
    h.fill(0.0);
    h[0] = -y[0].exp();
    h[3] = -y[1].exp();
    Ok(())
}

/// Lotka-Volterra in log coordinates; Hamiltonian but without any linear
/// reversibility, so none is registered.
pub fn lotka_volterra() -> HamiltonianSpec {
    HamiltonianSpec {
        name: "lotka-volterra",
        alias: "tlv",
        dim: 2,
        y0: vec![2.0f64.ln(), 3.0f64.ln()],
        h_ref: 0.1,
        t_ref: 1e3,
        reversibility: vec![],
        hamiltonian: tlv_hamiltonian,
        gradient: tlv_gradient,
        hessian: tlv_hessian,
        extra_invariants: vec![],
    }
}

/// All benchmark systems.
pub fn all_problems() -> Vec<HamiltonianSpec> {
    vec![henon_heiles(), double_pendulum(), kepler(), lotka_volterra()]
}

/// Look a problem up by name or alias (`hh`, `dp`, `kepler`, `tlv`).
pub fn problem_by_name(name: &str) -> Option<HamiltonianSpec> {
    all_problems()
        .into_iter()
        .find(|p| p.name.eq_ignore_ascii_case(name) || p.alias.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng, spec: &HamiltonianSpec) -> Vec<f64> {
        // Stay near the reference orbit scale; Kepler needs |q| away from 0.
        let mut y: Vec<f64> = (0..spec.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if spec.alias == "kepler" {
            y[2] += 2.0;
        }
        y
    }

    #[test]
    fn henon_heiles_energy_is_one_seventh() {
        let spec = henon_heiles();
        let h = spec.hamiltonian(&spec.y0).unwrap();
        assert!((h - 1.0 / 7.0).abs() < 1e-15, "H(y0) = {h}");
    }

    #[test]
    fn henon_heiles_gradient_vanishes_at_origin() {
        let spec = henon_heiles();
        let g = spec.grad_h(&[0.0; 4]).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn double_pendulum_rest_energy() {
        let spec = double_pendulum();
        let h = spec.hamiltonian(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((h + 3.0).abs() < 1e-15);
    }

    #[test]
    fn kepler_initial_energy_and_momentum() {
        let spec = kepler();
        let h = spec.hamiltonian(&spec.y0).unwrap();
        assert!((h + 0.5).abs() < 1e-15, "H(y0) = {h}");
        assert!((kepler_angular_momentum(&spec.y0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn kepler_rejects_collision_states() {
        let spec = kepler();
        assert!(spec.hamiltonian(&[0.0, 0.0, 0.0, 0.0]).is_err());
        let mut out = vec![0.0; 4];
        assert!(spec.vector_field(&[1.0, 1.0, 1e-9, 0.0], &mut out).is_err());
    }

    #[test]
    fn tlv_initial_energy() {
        let spec = lotka_volterra();
        let h = spec.hamiltonian(&spec.y0).unwrap();
        let expect = 2.0f64.ln() - 2.0 + 2.0 * 3.0f64.ln() - 3.0;
        assert!((h - expect).abs() < 1e-15);
        assert!((h + 2.11).abs() < 0.01);
    }

    #[test]
    fn tlv_gradient_stationary_point() {
        let spec = lotka_volterra();
        let g = spec.grad_h(&[0.0, 2.0f64.ln()]).unwrap();
        assert!(g[0].abs() < 1e-15 && g[1].abs() < 1e-15);
    }

    #[test]
    fn energy_derivative_vanishes_along_field() {
        // <grad H, f> = 0 by skewness of J.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in all_problems() {
            for _ in 0..100 {
                let y = random_state(&mut rng, &spec);
                let g = spec.grad_h(&y).unwrap();
                let mut f = vec![0.0; spec.dim];
                spec.vector_field(&y, &mut f).unwrap();
                let dot: f64 = g.iter().zip(&f).map(|(a, b)| a * b).sum();
                let scale: f64 = g.iter().map(|x| x * x).sum::<f64>().max(1.0);
                assert!(
                    dot.abs() <= 1e-12 * scale,
                    "{}: <grad H, f> = {dot}",
                    spec.name
                );
            }
        }
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in all_problems() {
            let d = spec.dim;
            for _ in 0..20 {
                let y = random_state(&mut rng, &spec);
                let mut jac = vec![0.0; d * d];
                spec.jacobian(&y, &mut jac).unwrap();
                let mut scale: f64 = 1.0;
                for v in &jac {
                    scale = scale.max(v.abs());
                }
                for j in 0..d {
                    let delta = 1e-6 * (1.0 + y[j].abs());
                    let mut yp = y.clone();
                    let mut ym = y.clone();
                    yp[j] += delta;
                    ym[j] -= delta;
                    let mut fp = vec![0.0; d];
                    let mut fm = vec![0.0; d];
                    spec.vector_field(&yp, &mut fp).unwrap();
                    spec.vector_field(&ym, &mut fm).unwrap();
                    for i in 0..d {
                        let fd = (fp[i] - fm[i]) / (2.0 * delta);
                        let err = (jac[i * d + j] - fd).abs() / scale;
                        assert!(
                            err < 1e-6,
                            "{}: d f_{i} / d y_{j} analytic {} vs fd {fd}",
                            spec.name,
                            jac[i * d + j]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn reversibility_sign_structure() {
        // f(R y) = -R f(y) for every registered sign matrix.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for spec in all_problems() {
            for _ in 0..100 {
                let y = random_state(&mut rng, &spec);
                for r in &spec.reversibility {
                    let ry: Vec<f64> = y.iter().zip(r).map(|(a, b)| a * b).collect();
                    let mut f_ry = vec![0.0; spec.dim];
                    let mut f_y = vec![0.0; spec.dim];
                    if spec.vector_field(&ry, &mut f_ry).is_err()
                        || spec.vector_field(&y, &mut f_y).is_err()
                    {
                        continue;
                    }
                    for i in 0..spec.dim {
                        assert!(
                            (f_ry[i] + r[i] * f_y[i]).abs() < 1e-12,
                            "{}: reversibility violated",
                            spec.name
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn lookup_by_alias() {
        assert_eq!(problem_by_name("hh").unwrap().name, "henon-heiles");
        assert_eq!(problem_by_name("TLV").unwrap().name, "lotka-volterra");
        assert!(problem_by_name("nope").is_none());
    }
}
