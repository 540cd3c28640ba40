use quadromech::sweep::{Axis, FixedParams, Observable, Parameter, Scenario, Spacing, SweepSpec};
use quadromech::TruncatedSpace;

fn spec(s: Scenario) -> SweepSpec {
    let spec = SweepSpec::builtin(s).unwrap();
    spec.validate().unwrap();
    assert_eq!(spec.space, TruncatedSpace::default());
    spec
}

fn fixed(
    delta: Option<f64>,
    delta_m: Option<f64>,
    j: Option<f64>,
    epsilon: Option<f64>,
    n_th: Option<f64>,
) -> FixedParams {
    FixedParams {
        delta,
        delta_m,
        j,
        epsilon,
        gamma_m: Some(0.1),
        n_th,
    }
}

#[test]
fn fig2a_table() {
    let s = spec(Scenario::Fig2a);
    assert_eq!(s.axes, vec![Axis::range(Parameter::J, 0.05, 1.5, 60, Spacing::Log)]);
    assert_eq!(s.fixed, fixed(Some(0.0), Some(0.0), None, Some(0.05), Some(1e-4)));
    assert_eq!(s.delta_ratio, None);
    assert_eq!(
        s.columns(),
        vec!["J_over_gc", "n_a", "n_b", "g2_aa_0", "g2_bb_0", "g2_ab_0"]
    );
}

#[test]
fn fig2b_table() {
    let s = spec(Scenario::Fig2b);
    assert_eq!(s.axes[0].parameter, Parameter::Delta);
    assert_eq!(s.fixed, fixed(None, Some(0.0), Some(0.406), Some(0.05), Some(1e-4)));
    let ep = s.params_at(&[0.7]).unwrap();
    assert_eq!((ep.delta, ep.delta_m), (0.7, 0.0));
}

#[test]
fn fig2c_table() {
    let s = spec(Scenario::Fig2c);
    assert_eq!(s.axes[0].parameter, Parameter::DeltaM);
    assert_eq!(s.fixed, fixed(None, None, Some(0.406), Some(0.05), Some(1e-4)));
    assert_eq!(s.delta_ratio, Some(2.0));
    assert!(s.outputs.contains(&Observable::NA) && s.outputs.contains(&Observable::NB));
}

#[test]
fn fig2ef_table() {
    let s = spec(Scenario::Fig2ef);
    assert_eq!(
        s.axes,
        vec![Axis::range(Parameter::Tau, 0.0, 2.0, 256, Spacing::Linear)]
    );
    assert_eq!(
        s.fixed,
        fixed(Some(0.0), Some(0.0), Some(0.406), Some(0.05), Some(1e-4))
    );
    assert_eq!(s.outputs, Observable::SERIES.to_vec());
}

#[test]
fn fig3_table() {
    let s = spec(Scenario::Fig3);
    assert_eq!(s.axes[0], Axis::list(Parameter::NTh, vec![1e-3, 1e-2, 1e-1]));
    assert_eq!(s.axes[1].parameter, Parameter::Epsilon);
    assert_eq!(s.axes[1].spacing, Spacing::Log);
    assert_eq!(s.fixed, fixed(Some(0.0), Some(0.0), Some(0.406), None, None));
}

#[test]
fn fig4_table() {
    let s = spec(Scenario::Fig4);
    assert_eq!(
        s.axes,
        vec![
            Axis::range(Parameter::GammaM, 0.02, 1.0, 20, Spacing::Linear),
            Axis::range(Parameter::J, 0.2, 1.2, 20, Spacing::Linear),
        ]
    );
    assert_eq!(s.fixed.epsilon, Some(0.05));
    assert_eq!(s.fixed.n_th, Some(1e-4));
    assert_eq!((s.fixed.delta, s.fixed.delta_m), (Some(0.0), Some(0.0)));
    assert_eq!(s.fixed.gamma_m, None);
    assert_eq!(s.grid_size(), 400);
}

#[test]
fn fig5_table() {
    let s = spec(Scenario::Fig5);
    assert_eq!(
        s.axes,
        vec![Axis::range(Parameter::DeltaM, 3.0, 6.0, 150, Spacing::Linear)]
    );
    assert_eq!(s.fixed, fixed(None, None, Some(5.0), Some(0.05), Some(1e-4)));
    assert_eq!(s.delta_ratio, Some(2.0));
}

#[test]
fn fig6_table() {
    let s = spec(Scenario::Fig6);
    assert_eq!(s.axes[0], Axis::list(Parameter::NTh, vec![1e-4, 1e-3, 1e-2]));
    assert_eq!(s.axes[1].parameter, Parameter::Epsilon);
    assert_eq!(s.fixed, fixed(None, Some(3.9), Some(5.0), None, None));
    assert_eq!(s.delta_ratio, Some(2.0));
    let ep = s.params_at(&[1e-3, 0.1]).unwrap();
    assert_eq!((ep.delta, ep.n_th, ep.epsilon), (7.8, 1e-3, 0.1));
}

#[test]
fn custom_spec_round_trips_through_json() {
    let text = r#"{
        "scenario": "custom",
        "axes": [{"parameter": "j", "min": 0.2, "max": 0.6, "count": 3}],
        "fixed": {"epsilon": 0.05, "n_th": 1e-4},
        "outputs": ["g2_aa_0"]
    }"#;
    let s: SweepSpec = serde_json::from_str(text).unwrap();
    s.validate().unwrap();
    assert_eq!(s.axes[0].points(), vec![0.2, 0.4, 0.6]);
    let again: SweepSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(again, s);
    assert!(serde_json::from_str::<SweepSpec>(&text.replace("\"fixed\"", "\"fixd\"")).is_err());
}
