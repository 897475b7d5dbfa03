//! Parameter sweeps over the connection families.

use std::str::FromStr;

use acn_core::backend::GeometryBackend;
use acn_core::connections::{
    check_connection_flags, f45_family, parameter_conditions, q_four_param, q_ten_param, torsion, torsion_formula,
    ClassGuard, FourParamsS, LambdaMu, TenParams,
};
use acn_core::residual::Residual;
use acn_core::{Result, Scalar};
use rand_chacha::ChaCha8Rng;

use crate::report::Recorder;
use crate::suites::{constrained_t, format_params, r_prime_check, random_lambda_mu, Analysis, Constraint};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Ten,
    Four,
    LambdaMu,
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ten" => Ok(Family::Ten),
            "four" => Ok(Family::Four),
            "lambda-mu" => Ok(Family::LambdaMu),
            _ => Err(format!("unknown family `{s}` (expected ten, four or lambda-mu)")),
        }
    }
}

/// Where the sampled parameters come from.
#[derive(Clone, Debug)]
pub enum Points<S> {
    Random(usize),
    /// Cartesian power of the listed values.
    Grid(Vec<S>),
}

fn grid_points<S: Clone>(values: &[S], arity: usize) -> Vec<Vec<S>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    q
                })
            })
            .collect();
    }
    out
}

pub fn run<S: Scalar, B: GeometryBackend<S>>(
    b: &B,
    a: &Analysis<S>,
    family: Family,
    points: &Points<S>,
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder,
) -> std::result::Result<(), String> {
    match family {
        Family::Ten => ten(b, a, points, rng, rec),
        Family::Four => four(b, a, points, rng, rec),
        Family::LambdaMu => lambda_mu(b, a, points, rng, rec),
    }
}

const TEN_ANCHOR: &str = "parameter conditions predict nabla' xi = nabla' eta = 0 and nabla' g = 0";

fn ten<S: Scalar, B: GeometryBackend<S>>(
    b: &B,
    a: &Analysis<S>,
    points: &Points<S>,
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder,
) -> std::result::Result<(), String> {
    let Points::Random(count) = points else {
        return Err("the ten-parameter sweep samples randomly; use --count".into());
    };
    let modes = [Constraint::Free, Constraint::AlmostContact, Constraint::Natural];
    for i in 0..*count {
        let t: TenParams<S> = constrained_t(rng, modes[i % 3]);
        let id = format!("sweep.ten.{i:03}");
        let measured = (|| check_connection_flags(b, &q_ten_param(b.structure(), &a.fd, &t)?.apply(&a.lc)?))();
        let flags = match measured {
            Ok(f) => f,
            Err(e) => {
                rec.failed(&id, TEN_ANCHOR, e.to_string());
                continue;
            }
        };
        let tol = rec.tol();
        let pred = parameter_conditions(&t);
        let contact = flags.xi.max(flags.eta);
        let contact_ok = contact.vanishes(tol);
        let natural_ok = flags.g.vanishes(tol);
        // Sufficiency: predicted conditions must be realized by the connection.
        let agree = (!pred.almost_contact || contact_ok) && (!pred.natural || natural_ok);
        let value = format!(
            "t={} almost-contact predicted={} measured={} natural predicted={} measured={}",
            format_params(&t.t),
            pred.almost_contact,
            contact_ok,
            pred.natural,
            natural_ok
        );
        rec.verdict(&id, TEN_ANCHOR, agree, Some(contact.max(flags.g).max_abs), value);
    }
    Ok(())
}

const FOUR_ANCHOR: &str = "four-parameter torsion formula and the (lambda, mu) reduction";

fn four<S: Scalar, B: GeometryBackend<S>>(
    b: &B,
    a: &Analysis<S>,
    points: &Points<S>,
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder,
) -> std::result::Result<(), String> {
    if !a.cr.normal_and_closed() {
        return Err("the four-parameter family requires N = 0 and d eta = 0".into());
    }
    let params: Vec<FourParamsS<S>> = match points {
        Points::Random(n) => (0..*n).map(|_| FourParamsS::random(rng, 5, 4)).collect(),
        Points::Grid(values) => grid_points(values, 4)
            .into_iter()
            .map(|p| FourParamsS::new([p[0].clone(), p[1].clone(), p[2].clone(), p[3].clone()]))
            .collect(),
    };
    let s = b.structure();
    let guard = ClassGuard::Require(&a.cr);
    for (i, sp) in params.iter().enumerate() {
        let id = format!("sweep.four.{i:03}");
        let measured = (|| -> Result<Residual> {
            let q = q_four_param(s, &a.fd, sp, guard)?;
            let conn = q.apply(&a.lc)?;
            let mut r = Residual::of_difference(&torsion_formula(s, &a.fd, sp)?, &torsion(&conn, b.brackets(), s.g())?);
            if a.cr.is_f4_plus_f5.holds {
                r = r.max(f45_family(s, &a.lc, &a.fd, &sp.lambda_mu(), guard)?.residual_against(&conn));
            }
            Ok(r)
        })();
        match measured {
            Ok(r) => {
                let ok = r.vanishes(rec.tol());
                rec.verdict(&id, FOUR_ANCHOR, ok, Some(r.max_abs), format!("s={}", format_params(&sp.s)));
            }
            Err(e) => rec.failed(&id, FOUR_ANCHOR, e.to_string()),
        }
    }
    Ok(())
}

const LM_ANCHOR: &str = "R' of the two-parameter family in the pi basis, phi-Kaehler, xi-slot, curvature-like";

fn lambda_mu<S: Scalar, B: GeometryBackend<S>>(
    b: &B,
    a: &Analysis<S>,
    points: &Points<S>,
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder,
) -> std::result::Result<(), String> {
    if !a.cr.is_f4_plus_f5.holds {
        return Err("the (lambda, mu) family requires F in the sum of the two classes".into());
    }
    let pairs: Vec<LambdaMu<S>> = match points {
        Points::Random(n) => (0..*n).map(|_| random_lambda_mu(rng)).collect(),
        Points::Grid(values) => {
            grid_points(values, 2).into_iter().map(|p| LambdaMu::new(p[0].clone(), p[1].clone())).collect()
        }
    };
    let r = acn_core::backend::curvature(b, |b| b.levi_civita()).map_err(|e| e.to_string())?;
    for (i, lm) in pairs.iter().enumerate() {
        let id = format!("sweep.lambda-mu.{i:03}");
        let value = format!("(lambda, mu)={}", format_params(&[lm.lambda.clone(), lm.mu.clone()]));
        match r_prime_check(b, a, &r, lm) {
            Ok(report) => {
                let worst =
                    report.formula.max(report.phi_kaehler).max(report.xi_slot).max(report.curvature_like.worst());
                rec.verdict(&id, LM_ANCHOR, report.holds(rec.tol()), Some(worst.max_abs), value);
            }
            Err(e) => rec.failed(&id, LM_ANCHOR, e.to_string()),
        }
    }
    Ok(())
}
