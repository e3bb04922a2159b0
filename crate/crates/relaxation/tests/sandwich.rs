use model_ir::{ModelIR, NonlinearTerm, Provenance, Sense, TermKind, VarKind};
use proptest::prelude::*;
use relaxation::*;

fn power_term(lo: f64, hi: f64, exponent: f64, scale: f64) -> NonlinearTerm {
    let mut m = ModelIR::new("t", Sense::Maximize, Provenance::N1);
    let base = m.add_var("q+:P:0", VarKind::Continuous, lo, hi);
    let out = m.add_var("dh+:P:0", VarKind::Continuous, 0.0, f64::INFINITY);
    NonlinearTerm {
        id: "hw+:P:0".into(),
        group: "hw+:P".into(),
        kind: TermKind::SignedPower { base, out, exponent, scale },
        dom_lo: lo,
        dom_hi: hi,
    }
}

fn quad_term(alpha: f64, beta: f64, gamma: f64, lo: f64, hi: f64) -> NonlinearTerm {
    let mut m = ModelIR::new("t", Sense::Maximize, Provenance::N1);
    let q = m.add_var("qpu:PU:0", VarKind::Continuous, 0.0, hi);
    let z = m.add_var("z:PU:0", VarKind::Binary, 0.0, 1.0);
    let out = m.add_var("g:PU:0", VarKind::Continuous, 0.0, f64::INFINITY);
    NonlinearTerm {
        id: "hg:PU:0".into(),
        group: "hg:PU".into(),
        kind: TermKind::Quadratic { q, z, out, alpha, beta, gamma },
        dom_lo: lo,
        dom_hi: hi,
    }
}

fn partition(group: &str, lo: f64, hi: f64, level: usize) -> Partition {
    let n = 1usize << level;
    let bp: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * (i as f64) / (n as f64)).collect();
    Partition { group: group.into(), breakpoints: bp }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn power_envelope_sandwich(
        hi in 0.5f64..10.0,
        exponent in 1.1f64..2.5,
        scale in 0.1f64..5.0,
        level in 0usize..4,
        tangents in 2usize..5,
    ) {
        let term = power_term(0.0, hi, exponent, scale);
        let p = partition("hw+:P", 0.0, hi, level);
        let cfg = RelaxConfig { tangents_per_interval: tangents };
        let block = envelope_power(&term, &p, &cfg).unwrap();
        for i in 0..=100 {
            let x = hi * (i as f64) / 100.0;
            let f = scale * x.powf(exponent);
            let (lo_b, hi_b) = block.bounds_at(x).unwrap();
            prop_assert!(lo_b <= f + 1e-9, "lower {lo_b} > f {f} at {x}");
            prop_assert!(hi_b >= f - 1e-9, "upper {hi_b} < f {f} at {x}");
        }
    }

    #[test]
    fn quadratic_envelope_sandwich(
        alpha in -4.0f64..-0.05,
        beta in -2.0f64..2.0,
        gamma in 0.5f64..10.0,
        lo in 0.05f64..1.0,
        width in 0.5f64..4.0,
        level in 0usize..4,
    ) {
        let hi = lo + width;
        let term = quad_term(alpha, beta, gamma, lo, hi);
        let p = partition("hg:PU", lo, hi, level);
        let block = envelope_quadratic(&term, &p, &RelaxConfig::default()).unwrap();
        for i in 0..=100 {
            let x = lo + width * (i as f64) / 100.0;
            let g = alpha * x * x + beta * x + gamma;
            let (lo_b, hi_b) = block.bounds_at(x).unwrap();
            prop_assert!(lo_b <= g + 1e-9, "lower {lo_b} > g {g} at {x}");
            prop_assert!(hi_b >= g - 1e-9, "upper {hi_b} < g {g} at {x}");
        }
    }
}
