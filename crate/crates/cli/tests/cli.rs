//! Black-box tests driving the compiled binary.

use std::process::Command;

fn v2psim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_v2psim"))
}

#[test]
fn run_crossing_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = v2psim()
        .args([
            "run",
            "--scenario",
            "crossing",
            "--speed-kmh",
            "70",
            "--seed",
            "42",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("first advisory"), "{stdout}");
    for f in ["relpath_vehicle.csv", "dts_trace.csv", "per.csv", "cbp.csv", "summary.txt"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn run_accepts_a_json_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "kind": "custom",
        "seed": 5,
        "duration_s": 2.0,
        "actors": [
            {
                "kind": "vehicle",
                "start_east_m": -50.0,
                "start_north_m": 0.0,
                "heading_deg": 90.0,
                "speed_mps": 10.0,
                "motion": "straight"
            },
            {
                "kind": "pedestrian",
                "start_east_m": 0.0,
                "start_north_m": -3.0,
                "heading_deg": 0.0,
                "speed_mps": 1.4,
                "motion": "straight"
            }
        ],
        "ego_vru": 1
    }"#;
    let cfg_path = dir.path().join("scene.json");
    std::fs::write(&cfg_path, cfg).unwrap();
    let out = v2psim()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn invalid_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.json");
    // No vehicle actor: rejected by validation.
    std::fs::write(&cfg_path, r#"{"kind":"custom","seed":1,"duration_s":1.0,"actors":[]}"#).unwrap();
    let out = v2psim()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn msg_inspect_round_trips_a_known_bsm() {
    // Build a BSM through the library, then inspect its hex form.
    use v2p_core::messages::*;
    let bsm = Bsm {
        common: CommonSafetyFields {
            msg_count: 17,
            temp_id: TempId(*b"car7"),
            dsecond_ms: 31_500,
            position: v2p_core::geo::GeodeticPosition {
                lat_deg: 39.654_000_0,
                lon_deg: -79.972_000_0,
                elev_m: 301.5,
            },
            positional_accuracy_m: 2.5,
            speed_mps: 19.44,
            heading_deg: 90.0,
            accel: AccelSet4Way::default(),
        },
        transmission_state: TransmissionState::ForwardGears,
        steering_angle_deg: -2.5,
        brake: BrakeStatus { brake_applied: true, abs_active: false },
        vehicle_length_m: 4.5,
        vehicle_width_m: 1.8,
    };
    let hex_str: String = encode_bsm(&bsm).unwrap().iter().map(|b| format!("{b:02x}")).collect();
    let out = v2psim().args(["msg", "inspect", &hex_str]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("BSM"));
    assert!(stdout.contains("19.44 m/s"));
    assert!(stdout.contains("msg_count:      17"));
}

#[test]
fn msg_inspect_rejects_garbage() {
    let out = v2psim().args(["msg", "inspect", "zz"]).output().unwrap();
    assert!(!out.status.success());
    let out = v2psim().args(["msg", "inspect", "ff00aa"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn ab_produces_comparison_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = v2psim()
        .args([
            "ab",
            "--scenario",
            "congestion",
            "--peds",
            "20",
            "--duration",
            "5",
            "--seeds",
            "1,2",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("cbp_comparison.csv").exists());
    assert!(dir.path().join("per_comparison.csv").exists());
    assert!(dir.path().join("seed1-off").join("cbp.csv").exists());
    assert!(dir.path().join("seed2-on").join("summary.txt").exists());
}
