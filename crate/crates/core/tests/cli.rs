use std::f64::consts::PI;
use std::process::{Command, Output};

use seba_core::localization::epsilon;
use seba_core::scatterer::SeriesConfig;
use seba_core::transverse::{BoundaryCondition, TransverseBasis};

fn seba(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seba"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = seba(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn head(text: &str) -> Vec<&str> {
    text.lines().take(2).collect()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn schemas_are_pinned() {
    let cases: [(&[&str], [&str; 2]); 9] = [
        (&["spectrum", "--alpha-n", "3", "--count", "4"], ["# schema: seba/spectrum/v1", "index,z,kind,multiplicity,F"]),
        (&["alpha-for-z", "--z", "300"], ["# schema: seba/alpha-for-z/v1", "z,alpha,derivative,rows,tail_bound"]),
        (&["eigenfunction", "--z", "300", "--nx", "4", "--ny", "2"], ["# schema: seba/eigenfunction/v1", "x,y,re,im,z"]),
        (
            &["localization-sweep", "--E", "2pi", "--n-max", "2"],
            [
                "# schema: seba/localization-sweep/v1",
                "E,n,x0_frac,side,alpha,z,epsilon,bound,omega1_fraction,complement_fraction,index,correspondence_gap,status",
            ],
        ),
        (
            &["rate-fit", "--n-max", "2"],
            ["# schema: seba/rate-fit/v1", "x0_frac,n,side,slope,intercept,residual,samples,status"],
        ),
        (&["reproduce", "fig3", "--E", "2pi"], ["# schema: seba/fig3/v1", "n,alpha,z_target,limit,side"]),
        (
            &["reproduce", "fig4", "--tail-tol", "1e-6"],
            ["# schema: seba/fig4/v1", "z,omega1_norm,complement_norm,marker,n"],
        ),
        (&["reproduce", "fig5"], ["# schema: seba/fig5/v1", "x,y,re,im,z"]),
        (
            &["reproduce", "fig6", "--E", "2pi", "--E", "4pi", "--E", "6pi"],
            ["# schema: seba/fig6/v1", "x0_frac,n,side,slope,intercept,residual,samples,status"],
        ),
    ];
    for (args, expected) in cases {
        let text = stdout(args);
        assert_eq!(head(&text), expected, "{args:?}");
        assert!(text.lines().count() > 2, "{args:?} produced no rows");
    }
}

#[test]
fn spectrum_places_third_level() {
    let text = stdout(&["spectrum", "--alpha-n", "3", "--count", "5"]);
    let r = rows(&text);
    assert_eq!(r.len(), 5);
    assert_eq!(r[2][0], "3");
    let z: f64 = r[2][1].parse().unwrap();
    let target = PI * PI * 10.0 * PI + (2.0 * PI / ((10.0 * PI).sqrt() * (1.0 - 1.0 / PI))).powi(2);
    assert!((z - target).abs() < 1e-8 * target, "{z} vs {target}");
    assert_eq!(format!("{z:.2e}"), "3.13e2");
}

#[test]
fn empty_spectrum_is_header_only() {
    let text = stdout(&["spectrum", "--alpha", "0", "--count", "0"]);
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn floats_use_seventeen_digits() {
    let text = stdout(&["alpha-for-z", "--z", "-1e4"]);
    let r = rows(&text);
    assert_eq!(r[0][0], "-1.0000000000000000e4");
    assert!(r[0][1].contains('e') && r[0][1].len() >= 22);
}

#[test]
fn exit_codes() {
    assert_eq!(seba(&["spectrum", "--alpha-n", "3"]).status.code(), Some(0));
    assert_eq!(seba(&["spectrum"]).status.code(), Some(2));
    assert_eq!(
        seba(&["spectrum", "--alpha", "0", "--theta", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        seba(&["spectrum", "--alpha", "0", "--bc", "floquet", "--theta", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(seba(&["spectrum", "--alpha-n", "1"]).status.code(), Some(2));
    assert_eq!(seba(&["reproduce", "fig9"]).status.code(), Some(2));
    assert_eq!(seba(&["alpha-for-z", "--z", "x"]).status.code(), Some(2));
    assert_eq!(
        seba(&["alpha-for-z", "--z", "300", "--x0-frac", "1.5"])
            .status
            .code(),
        Some(2)
    );
    let pole = format!("{}", PI * PI * 10.0 * PI + PI * PI / (10.0 * PI));
    assert_eq!(seba(&["alpha-for-z", "--z", &pole]).status.code(), Some(3));
    assert_eq!(
        seba(&[
            "alpha-for-z",
            "--z",
            "300",
            "--tail-tol",
            "1e-15",
            "--max-terms",
            "1000"
        ])
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("spectrum.csv");
    std::fs::write(
        &cfg,
        "E = \"10pi\"\nx0_frac = \"1/pi\"\n\n[spectrum]\nalpha_n = 3\ncount = 4\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&["--config", cfg, "spectrum"]);
    assert_eq!(
        from_file,
        stdout(&["spectrum", "--alpha-n", "3", "--count", "4"])
    );
    let overridden = stdout(&["--config", cfg, "spectrum", "--count", "2"]);
    assert_eq!(rows(&overridden).len(), 2);
    assert!(stdout(&["--config", cfg, "spectrum", "--out", out.to_str().unwrap()]).is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), from_file);

    std::fs::write(dir.path().join("bad.toml"), "colour = 1\n").unwrap();
    let bad = dir.path().join("bad.toml");
    assert_eq!(
        seba(&["--config", bad.to_str().unwrap(), "spectrum"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sweep_row_matches_library() {
    let text = stdout(&[
        "localization-sweep",
        "--E",
        "4pi",
        "--n-min",
        "3",
        "--n-max",
        "3",
    ]);
    let r = rows(&text);
    assert_eq!(r.len(), 1);
    let basis = TransverseBasis::new(BoundaryCondition::Dirichlet).unwrap();
    let rep = epsilon(3, 4.0 * PI, 1.0 / PI, 0.5, &basis, &SeriesConfig::default()).unwrap();
    assert_eq!(r[0][6], seba_core::csv::format_float(rep.epsilon));
    assert_eq!(r[0][3], rep.side.name());
    assert_eq!(r[0][12], "ok");
}

#[test]
fn midpoint_sweep_is_flagged() {
    let out = seba(&[
        "localization-sweep",
        "--E",
        "2pi",
        "--x0-frac",
        "0.5",
        "--n-max",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let r = rows(&text);
    assert!(!r.is_empty());
    assert!(r.iter().all(|row| row[12] == "symmetric"), "{text}");
}

#[test]
fn floquet_spectrum_runs() {
    let text = stdout(&[
        "spectrum", "--bc", "floquet", "--theta", "-pi/2", "--alpha", "0.1", "--count", "6",
    ]);
    let z: Vec<f64> = rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(z.len(), 6);
    assert!(z.windows(2).all(|w| w[0] <= w[1]));
}
