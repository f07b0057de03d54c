//! Pass/fail table over the field catalog.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::PrescribedField;
use super::flow::{default_fd_step, expected_determinant, integrate_flow, jacobian_fd, Phase};
use super::liouville::{
    functional_from_nodes, initial_functional, transported_nodes, Bump, Quadrature,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowCheckRow {
    pub check: &'static str,
    pub field: &'static str,
    /// Sample index, `q`, or 0 depending on the check.
    pub param: f64,
    pub t: f64,
    pub value: f64,
    pub reference: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl FlowCheckRow {
    fn new(
        check: &'static str,
        field: &'static str,
        param: f64,
        t: f64,
        value: f64,
        reference: f64,
        tol: f64,
    ) -> Self {
        let rel_err = (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
        FlowCheckRow {
            check,
            field,
            param,
            t,
            value,
            reference,
            rel_err,
            tol,
            pass: rel_err.is_finite() && rel_err <= tol,
        }
    }
}

pub const CSV_HEADER: &str = "check,field,param,t,value,reference,rel_err,tol,pass";

pub fn to_csv(rows: &[FlowCheckRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{:.16e},{:.16e},{:.6e},{:.1e},{}\n",
            r.check, r.field, r.param, r.t, r.value, r.reference, r.rel_err, r.tol, r.pass
        ));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowCheckOptions {
    pub fields: Vec<PrescribedField>,
    pub jacobian_points: usize,
    pub seed: u64,
    /// Exponent in the expected determinant; the flow has 3.
    pub jacobian_exponent: f64,
    pub q_values: Vec<f64>,
    pub times: Vec<f64>,
    pub quadrature: Quadrature,
    pub f_in: Bump,
    pub tol: f64,
}

impl Default for FlowCheckOptions {
    fn default() -> Self {
        FlowCheckOptions {
            fields: PrescribedField::catalog(),
            jacobian_points: 20,
            seed: 20_240_517,
            jacobian_exponent: 3.0,
            q_values: vec![1.0, 2.0, 3.0],
            times: vec![0.5, 1.0, 2.0],
            quadrature: Quadrature::default(),
            f_in: Bump::default(),
            tol: 1e-6,
        }
    }
}

fn random_phase(rng: &mut ChaCha8Rng) -> Phase {
    std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
}

/// Jacobian of the backward map `t -> 0` against `exp[3 phi(t, x) - 3 phi(0, X(0))]`.
pub fn jacobian_rows(
    field: &PrescribedField,
    opts: &FlowCheckOptions,
) -> Result<Vec<FlowCheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rows = Vec::with_capacity(opts.jacobian_points);
    for k in 0..opts.jacobian_points {
        let z = random_phase(&mut rng);
        let t = rng.gen_range(0.5..2.0);
        let det = jacobian_fd(&z, field, t, 0.0, default_fd_step(&z))?;
        let z0 = integrate_flow(&z, field, t, 0.0, 1e-13)?;
        let expect = expected_determinant(field, &z, &z0, t, 0.0, opts.jacobian_exponent);
        rows.push(FlowCheckRow::new(
            "jacobian",
            field.name(),
            k as f64,
            t,
            det,
            expect,
            opts.tol,
        ));
    }
    Ok(rows)
}

/// Pull `(X, P)` back through the inverse flow and rebuild `f` from `f_in` there.
pub fn representation_rows(
    field: &PrescribedField,
    opts: &FlowCheckOptions,
) -> Result<Vec<FlowCheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let mut rows = Vec::new();
    for &t in &opts.times {
        for k in 0..4 {
            // start inside the bump so f_in is not zero
            let z: Phase = std::array::from_fn(|i| {
                let r = if i < 3 { opts.f_in.rx } else { opts.f_in.rp };
                0.5 * r * rng.gen_range(-1.0..1.0)
            });
            let mut a = [0.0; 7];
            a[..6].copy_from_slice(&z);
            let fwd = super::flow::integrate_augmented(&a, field, 0.0, t, 1e-12)?;
            let f_direct = opts.f_in.eval(&z) * (4.0 * fwd[6]).exp();
            let end: Phase = std::array::from_fn(|i| fwd[i]);
            let back = integrate_flow(&end, field, t, 0.0, 1e-12)?;
            let f_pulled = opts.f_in.eval(&back)
                * (4.0 * field.phi(t, &[end[0], end[1], end[2]])
                    - 4.0 * field.phi(0.0, &[back[0], back[1], back[2]]))
                .exp();
            rows.push(FlowCheckRow::new(
                "representation",
                field.name(),
                k as f64,
                t,
                f_pulled,
                f_direct,
                opts.tol,
            ));
        }
    }
    Ok(rows)
}

pub fn liouville_rows(
    field: &PrescribedField,
    opts: &FlowCheckOptions,
) -> Result<Vec<FlowCheckRow>> {
    let mut rows = Vec::new();
    for &t in &opts.times {
        let (nodes, w) = transported_nodes(&opts.f_in, field, t, &opts.quadrature)?;
        for &q in &opts.q_values {
            let v = functional_from_nodes(&opts.f_in, q, field, t, &nodes, w);
            let v0 = initial_functional(&opts.f_in, q, field, &opts.quadrature);
            rows.push(FlowCheckRow::new(
                "liouville",
                field.name(),
                q,
                t,
                v,
                v0,
                opts.tol,
            ));
        }
    }
    Ok(rows)
}

pub fn run_flow_checks(opts: &FlowCheckOptions) -> Result<Vec<FlowCheckRow>> {
    let mut rows = Vec::new();
    for f in &opts.fields {
        rows.extend(jacobian_rows(f, opts)?);
        rows.extend(representation_rows(f, opts)?);
        rows.extend(liouville_rows(f, opts)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> FlowCheckOptions {
        FlowCheckOptions {
            jacobian_points: 3,
            quadrature: Quadrature {
                points_per_axis: 3,
                tol: 1e-11,
            },
            ..Default::default()
        }
    }

    #[test]
    fn quick_suite_passes() {
        let rows = run_flow_checks(&quick()).unwrap();
        assert_eq!(rows.len(), 4 * (3 + 12 + 9));
        for r in &rows {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn wrong_exponent_is_caught() {
        let opts = FlowCheckOptions {
            fields: vec![PrescribedField::LinearInTime { alpha: 0.3 }],
            jacobian_exponent: 2.0,
            ..quick()
        };
        let rows = jacobian_rows(&opts.fields[0], &opts).unwrap();
        assert!(rows.iter().all(|r| !r.pass));
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let opts = FlowCheckOptions {
            fields: vec![PrescribedField::Zero],
            ..quick()
        };
        let rows = jacobian_rows(&opts.fields[0], &opts).unwrap();
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), rows.len() + 1);
        assert!(csv.starts_with(CSV_HEADER));
    }
}
