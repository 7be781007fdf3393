use lptransport::experiments::{emit, run, ExperimentConfig, ExperimentReport, OutputFormat};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap()
}

const REGULARITY: &str = r#"
kind = "regularity"
n = 64
a = 0.9
t_end = 2.0
dt = 0.01
samples = 20
commutator = true

[velocity]
kind = "steady_shear"

[initial]
kind = "random"
seed = 5
kmax = 6
"#;

#[test]
fn reports_are_reproducible_and_round_trip() {
    let cfg = config(REGULARITY);
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a, b, "identical configs must give bit-identical reports");

    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    emit(&a, OutputFormat::Json, &json).unwrap();
    let back = ExperimentReport::load_json(&json).unwrap();
    assert_eq!(back, a);
    assert_eq!(back.config.seed(), Some(5));

    let csv = dir.path().join("r.csv");
    emit(&a, OutputFormat::Csv, &csv).unwrap();
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, a.records.columns);
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), cfg.samples + 1);
    assert_eq!(rows, a.records.rows, "CSV values parse back exactly");
}

#[test]
fn differential_inequality_shares_the_commutator_constant() {
    let r = run(&config(REGULARITY)).unwrap();
    let bound = r.summary_value("sup_comm_bound_c").unwrap();
    let rate = r.summary_value("sup_energy_rate_c").unwrap();
    assert!(bound > 0.0 && bound.is_finite());
    assert!(rate <= bound * (1.0 + 1e-12), "{rate} > {bound}");
    for check in &r.checks {
        assert!(check.holds_with(check.min_constant));
        assert!(check.inputs.contains_key("t"));
    }
    // Steady shear has no velocity above |η| = 1, so only the third sum is active.
    let i = r.records.column("comm_i").unwrap();
    let ii = r.records.column("comm_ii").unwrap();
    assert!(i.iter().chain(&ii).all(|v| *v == 0.0));
}

const MIXING: &str = r#"
kind = "mixing"
n = 64
a = 0.9
t_end = 10.0
dt = 0.01
samples = 50

[initial]
kind = "random"
seed = 1
kmax = 4
"#;

#[test]
fn mixing_distinguishes_exponential_from_algebraic_decay() {
    let alt = run(&config(&format!("{MIXING}\n[velocity]\nkind = \"alternating_shear\"\nperiod = 6.0\n"))).unwrap();
    assert!(alt.summary_value("lambda").unwrap() > 0.05);
    assert_eq!(alt.flag("lower_envelope"), Some(true));
    assert_eq!(alt.flag("sub_exponential"), Some(false));

    let steady = MIXING.replace("kind = \"random\"\nseed = 1\nkmax = 4", "kind = \"harmonic\"\nwavevector = [1, 0]");
    let shear = run(&config(&format!("{steady}\n[velocity]\nkind = \"steady_shear\"\n"))).unwrap();
    assert_eq!(shear.flag("sub_exponential"), Some(true));
    let g = shear.records.column("grad_integral").unwrap();
    let t = shear.records.column("t").unwrap();
    let rate = (2.0 * std::f64::consts::PI).powf(2.0 / 2.0);
    for (g, t) in g.iter().zip(&t) {
        assert!((g - rate * t).abs() < 1e-9 * rate * t.max(1.0), "rescaled velocity grows ∫‖∇u‖ linearly");
    }
}
