use std::fs;

use immunity_mfg::horizon::HorizonSchedule;
use immunity_mfg::scenarios::{
    builtin, column_names, run_scenario, write_outputs, Builtin, ModelKind, ScenarioConfig, ScenarioResult,
};

fn scenario(name: &str) -> ScenarioConfig {
    match builtin(name) {
        Some(Builtin::Scenario(c)) => c,
        _ => panic!("no builtin scenario {name}"),
    }
}

fn two_horizons() -> ScenarioResult {
    let mut config = scenario("fig1-mfg");
    config.name = "two-horizons".into();
    config.set_schedule(&HorizonSchedule::new(vec![150.0, 300.0], vec![0.5, 0.5]).unwrap());
    run_scenario(&config).unwrap()
}

fn read_table(path: &std::path::Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn significant_digits(field: &str) -> usize {
    let mantissa = field.split(['e', 'E']).next().unwrap();
    mantissa.chars().filter(|c| c.is_ascii_digit()).count()
}

#[test]
fn headers_follow_the_model() {
    assert_eq!(
        column_names(ModelKind::MfgSirsd, 0),
        ["t", "S", "I", "R", "D", "V_S", "V_I", "V_R", "c_S"]
    );
    let cols = column_names(ModelKind::Belief, 2);
    assert_eq!(
        cols,
        ["t", "N_0", "N_1", "N_2", "I", "D", "V_0", "V_1", "V_2", "V_I", "c_0", "c_1", "c_2"]
    );
}

#[test]
fn trajectory_csv_repeats_event_times_with_ten_digits() {
    let result = two_horizons();
    let dir = tempfile::tempdir().unwrap();
    let paths = write_outputs(&result, dir.path()).unwrap();
    assert_eq!(paths.len(), 3);

    let (header, rows) = read_table(&dir.path().join("trajectory.csv"));
    assert_eq!(header, column_names(ModelKind::MfgSirsd, 0));
    assert_eq!(rows.len(), 602);
    let times: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(times[0], 0.0);
    assert_eq!(*times.last().unwrap(), 300.0);
    let repeated: Vec<f64> = times.windows(2).filter(|w| w[0] == w[1]).map(|w| w[0]).collect();
    assert_eq!(repeated, vec![150.0]);
    assert!(times.windows(2).all(|w| w[1] >= w[0]));

    for row in &rows {
        assert_eq!(row.len(), header.len());
        for field in row {
            let x: f64 = field.parse().unwrap();
            assert!(x.is_finite());
            assert_eq!(significant_digits(field), 10, "{field}");
        }
    }

    // the left limit comes first: values jump towards the terminal payoff
    let k = times.iter().position(|&t| t == 150.0).unwrap();
    let v_s = |r: usize| rows[r][5].parse::<f64>().unwrap();
    assert!(v_s(k) < v_s(k + 1));
}

#[test]
fn metrics_record_carries_metrics_and_diagnostics() {
    let result = two_horizons();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&result, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("metrics.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();

    assert_eq!(json["scenario"], "two-horizons");
    assert_eq!(json["model"], "mfg-sirsd");
    assert_eq!(json["horizon"], "150:0.5,300:0.5");
    assert_eq!(json["peak_i"].as_f64().unwrap(), result.metrics.peak_i);
    assert_eq!(json["mean_i"].as_f64().unwrap(), result.metrics.mean_i);
    assert_eq!(json["final_d"].as_f64().unwrap(), result.metrics.final_d);
    assert!(json["argmax_t"].as_f64().is_some());
    for key in ["peak_i", "mean_i", "final_d"] {
        assert!(json["horizon_expected"][key].as_f64().is_some());
    }
    assert_eq!(json["report"]["converged"], true);
    assert_eq!(json["report"]["mesh_size"], 602);
    assert!(json["report"].get("wall_time").is_none());
    assert!(json["certificate"]["policy"].as_f64().unwrap() <= 1e-5);
    assert!(json.get("m").is_none());
}

#[test]
fn structured_record_names_the_grid() {
    let mut config = scenario("fig2b-belief");
    config.m = 3;
    let result = run_scenario(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&result, dir.path()).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(json["model"], "belief");
    assert_eq!(json["m"], 3);
    assert_eq!(json["alpha"].as_f64(), Some(0.1));
    assert_eq!(json["ladder"], serde_json::json!([3]));

    let (header, rows) = read_table(&dir.path().join("trajectory.csv"));
    assert_eq!(header.len(), 3 * 4 + 4);
    assert_eq!(rows.len(), 601);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let config = scenario("fig1-mfg");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_outputs(&run_scenario(&config).unwrap(), a.path()).unwrap();
    write_outputs(&run_scenario(&config).unwrap(), b.path()).unwrap();
    for file in ["trajectory.csv", "metrics.json", "scenario.toml"] {
        let (x, y) = (
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
        );
        assert!(x == y, "{file} differs");
    }
}

#[test]
fn written_scenario_file_reproduces_the_config() {
    let result = two_horizons();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&result, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("scenario.toml")).unwrap();
    assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), result.config);
}

#[test]
fn custom_file_names_are_honoured() {
    let mut config = scenario("fig1-myopic");
    config.output.trajectory = "path.csv".into();
    config.output.metrics = "summary.json".into();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&run_scenario(&config).unwrap(), dir.path()).unwrap();
    assert!(dir.path().join("path.csv").is_file());
    assert!(dir.path().join("summary.json").is_file());
}
