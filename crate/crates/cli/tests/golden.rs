//! Frozen reference values of the bundled examples: regenerated from the
//! brute-force reference and compared with what the library computes.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use acn_core::scalar::{format_rational, parse_rational};
use acn_core::{Rational, Scalar};
use acn_lab::engine::{default_backend, load};
use acn_lab::registry::{Component, Golden, GoldenFlags, EXAMPLES};
use acn_lab::report::Recorder;
use acn_lab::suites::analyse;
use acn_lab::with_backend;
use common::{f45_brackets, r, Oracle};
use num_traits::Zero;

/// `(alpha, beta, xi theta*(xi), tolerance)` of the frame each example reduces to.
fn parameters(name: &str) -> (Rational, Rational, Rational, Option<f64>) {
    match name {
        "ex-flat" => (r(0, 1), r(0, 1), r(0, 1), None),
        "ex-f4" => (r(0, 1), r(1, 1), r(0, 1), None),
        "ex-f5" => (r(1, 1), r(0, 1), r(0, 1), None),
        "ex-f45" => (r(1, 1), r(1, 1), r(0, 1), None),
        // a = exp(-t/2): alpha = -a'/a = 1/2, constant.
        "ex-chart" => (r(1, 2), r(0, 1), r(0, 1), Some(1e-5)),
        // a = 1 + t^2 at t = 1/2: alpha = -2t/(1+t^2) = -4/5,
        // xi theta*(xi) = -2 alpha' = 2 (2 - 2t^2)/(1+t^2)^2 = 48/25.
        "ex-chart-poly" => (r(-4, 5), r(0, 1), r(48, 25), Some(1e-5)),
        other => panic!("no reference parameters for {other}"),
    }
}

fn all_zero(mut f: impl FnMut(usize, usize, usize) -> Rational, d: usize) -> bool {
    (0..d).all(|i| (0..d).all(|j| (0..d).all(|k| f(i, j, k).is_zero())))
}

fn oracle_golden(name: &str) -> Golden {
    let (alpha, beta, xi_ths, tolerance) = parameters(name);
    let o = Oracle::canonical(1, f45_brackets(1, alpha, beta));
    let d = o.dim;
    let (th, ths) = o.theta(o.xi);
    let two_n = r(2, 1);
    let e = |i: usize| o.unit(i);
    let f4 = |i: usize, j: usize, k: usize| {
        let (x, y, z) = (e(i), e(j), e(k));
        -(th.clone() / two_n.clone())
            * (o.gv(&o.phi_v(&x), &o.phi_v(&y)) * o.eta(&z) + o.gv(&o.phi_v(&x), &o.phi_v(&z)) * o.eta(&y))
    };
    let f5 = |i: usize, j: usize, k: usize| {
        let (x, y, z) = (e(i), e(j), e(k));
        -(ths.clone() / two_n.clone()) * (o.gv(&o.phi_v(&x), &y) * o.eta(&z) + o.gv(&o.phi_v(&x), &z) * o.eta(&y))
    };
    let flags = GoldenFlags {
        f0: all_zero(|i, j, k| o.f(i, j, k), d),
        normal: all_zero(|i, j, k| o.nijenhuis(i, j, k), d),
        eta_closed: all_zero(|i, j, _| o.nabla_eta(&e(i), &e(j)) - o.nabla_eta(&e(j), &e(i)), d),
        f4: all_zero(|i, j, k| o.f(i, j, k) - f4(i, j, k), d),
        f5: all_zero(|i, j, k| o.f(i, j, k) - f5(i, j, k), d),
        f4_plus_f5: all_zero(|i, j, k| o.f(i, j, k) - f4(i, j, k) - f5(i, j, k), d),
    };
    let f = o
        .f_all()
        .into_iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|((i, j, k), v)| Component { index: [i, j, k], value: format_rational(&v) })
        .collect();
    Golden {
        name: name.into(),
        tolerance,
        theta_xi: format_rational(&th),
        theta_star_xi: format_rational(&ths),
        xi_theta_xi: "0".into(),
        xi_theta_star_xi: format_rational(&xi_ths),
        f,
        flags,
    }
}

fn to_json(g: &Golden) -> String {
    let mut s = serde_json::to_string_pretty(g).unwrap();
    s.push('\n');
    s
}

#[test]
#[ignore = "rewrites the golden files"]
fn regenerate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("golden");
    for e in &EXAMPLES {
        std::fs::write(dir.join(format!("{}.json", e.name)), to_json(&oracle_golden(e.name))).unwrap();
    }
}

#[test]
fn golden_files_match_the_reference() {
    for e in &EXAMPLES {
        assert_eq!(e.reference(), oracle_golden(e.name), "{}", e.name);
    }
}

#[test]
fn reference_spot_values() {
    let f5 = oracle_golden("ex-f5");
    assert_eq!((f5.theta_xi.as_str(), f5.theta_star_xi.as_str()), ("0", "-2"));
    let f4 = oracle_golden("ex-f4");
    assert_eq!((f4.theta_xi.as_str(), f4.theta_star_xi.as_str()), ("-2", "0"));
    assert!(f4.flags.f4 && !f4.flags.f5 && f4.flags.normal);
    let flat = oracle_golden("ex-flat");
    assert!(flat.flags.f0 && flat.f.is_empty());
}

fn close(name: &str, what: &str, got: f64, want: &str, tol: Option<f64>) {
    let want = parse_rational(want).unwrap().to_f64();
    let t = tol.unwrap_or(0.0);
    assert!((got - want).abs() <= t, "{name} {what}: {got} vs {want}");
}

#[test]
fn library_reproduces_the_golden_values() {
    for e in &EXAMPLES {
        let golden = e.reference();
        let spec = e.manifold();
        let loaded = load(&spec, default_backend(&spec)).unwrap();
        let tol = loaded.tolerance(None);
        assert_eq!(tol, golden.tolerance, "{}", e.name);
        let rec = Recorder::new("check", tol);
        with_backend!(&loaded, b => {
            let a = analyse(b, rec.tol()).unwrap();
            close(e.name, "theta(xi)", a.fd.theta_xi.to_f64(), &golden.theta_xi, tol);
            close(e.name, "theta*(xi)", a.fd.theta_star_xi.to_f64(), &golden.theta_star_xi, tol);
            close(e.name, "xi theta(xi)", a.fd.xi_theta_xi.to_f64(), &golden.xi_theta_xi, tol);
            close(e.name, "xi theta*(xi)", a.fd.xi_theta_star_xi.to_f64(), &golden.xi_theta_star_xi, tol);
            a.fd.f.for_each(|idx, v| {
                let want = golden
                    .f
                    .iter()
                    .find(|c| c.index[..] == idx[..])
                    .map_or("0", |c| c.value.as_str());
                close(e.name, &format!("F{idx:?}"), v.to_f64(), want, tol);
            });
            let flags = GoldenFlags {
                f0: a.cr.is_f0.holds,
                normal: a.cr.is_normal.holds,
                eta_closed: a.cr.eta_closed.holds,
                f4: a.cr.is_f4.holds,
                f5: a.cr.is_f5.holds,
                f4_plus_f5: a.cr.is_f4_plus_f5.holds,
            };
            assert_eq!(flags, golden.flags, "{}", e.name);
        });
    }
}
