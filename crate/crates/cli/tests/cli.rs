use std::process::Command;

use hrw_cli::{run, EXIT_MATH, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn hrw(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hrw").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let o = hrw(&full);
    assert_eq!(o.code, EXIT_OK, "{args:?}: {}", o.err);
    serde_json::from_str(&o.out).unwrap()
}

fn q(v: &Value) -> f64 {
    let s = v.as_str().unwrap();
    let (n, d) = s.split_once('/').unwrap();
    n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()
}

fn schema() -> jsonschema::Validator {
    let text = include_str!("../../../docs/output.schema.json");
    jsonschema::validator_for(&serde_json::from_str(text).unwrap()).unwrap()
}

#[test]
fn derivative_of_a_cube() {
    let o = hrw(&["diff", "x^3", "--at", "2"]);
    assert_eq!((o.code, o.out.as_str(), o.err.as_str()), (EXIT_OK, "12\n", ""));
}

#[test]
fn sequence_limit_by_field_evaluation() {
    let o = hrw(&["limit-seq", "(1/n)^3"]);
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(o.out, "0 (method: field-evaluation)\n");
}

#[test]
fn polar_moment_of_the_unit_disc() {
    let v = json(&[
        "measure", "moment", "--rho", "1", "--region", "x^2+y^2-1", "--integrand", "x^2+y^2",
        "--meshes", "1/64,1/128,1/256,1/512",
    ]);
    assert!(schema().is_valid(&v));
    assert_eq!(v["label"], "finite-scale emulation");
    let half_pi = std::f64::consts::FRAC_PI_2;
    let gaps: Vec<f64> = v["rows"].as_array().unwrap().iter().map(|r| (q(&r["value"]) - half_pi).abs()).collect();
    assert_eq!(gaps.len(), 4);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[3] < 1e-2);
    assert!((q(&v["estimate"]) - half_pi).abs() < 1e-3);
}

#[test]
fn every_subcommand_matches_the_schema() {
    let validator = schema();
    let cases: &[&[&str]] = &[
        &["eval", "x^2+y", "--at", "x=1/2,y=3"],
        &["st", "sin(x)/x", "--at", "x=0"],
        &["classify", "x", "--at", "x=inf"],
        &["limit-seq", "(1+1/n)^n"],
        &["limit-fn", "1/x", "--at", "0"],
        &["limit-fn", "x^2", "--at", "1", "--continuity"],
        &["diff", "sin(x)", "--at", "0", "--order", "3"],
        &["jet", "exp(x)", "--at", "0"],
        &["increment", "x^3", "--at", "1", "--order", "2"],
        &["tangent", "t,t^2", "--at", "1"],
        &["curvature", "t,t^2", "--at", "0"],
        &["curvature", "t,2*t", "--at", "0"],
        &["jacobian", "x*y,x+y", "--at", "1,2"],
        &["kinematics", "16*t^2", "--at", "1"],
        &["integrate", "x^2", "--cells", "4,8"],
        &["integrate", "x^2", "--method", "darboux", "--cells", "4"],
        &["integrate", "x", "--method", "stieltjes", "--phi", "x^2", "--cells", "4"],
        &["integrate", "x^2", "--method", "gauge", "--gauge", "1/10"],
        &["integrate", "x^2", "--method", "mcshane", "--gauge", "1/10"],
        &["integrate", "x*y", "--rect", "0,1;0,1", "--cells", "4", "--tags", "seeded-random", "--seed", "7"],
        &["measure", "area", "--upper", "x", "--cells", "4,8", "--oracle", "1/2"],
        &["measure", "volume-rev", "x", "--cells", "4"],
        &["measure", "surface-rev", "x", "--cells", "4"],
        &["measure", "length", "t,t^2", "--cells", "4"],
        &["measure", "mass", "--region", "x^2+y^2-1", "--cells", "4"],
        &["measure", "com", "--region", "x^2+y^2-1", "--cells", "8"],
        &["measure", "moment", "--region", "x^2+y^2-1", "--integrand", "x^2", "--cells", "4"],
        &["measure", "work", "y,x", "--curve", "t,t", "--cells", "4"],
        &["measure", "impulse", "t", "--cells", "4,8", "--oracle", "simpson"],
        &["measure", "morley", "--n", "10"],
        &["converge", "integrate", "x^2", "--cells", "4,8,16"],
        &["probe-supernear", "x^2", "--functional", "integral(x^2)", "--cells", "8,16"],
    ];
    for args in cases {
        let v = json(args);
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| format!("{e} at {}", e.instance_path)).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}\n{v}");
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let validator = schema();
    let good = json(&["diff", "x^3", "--at", "2"]);
    assert!(validator.is_valid(&good));
    let mut bad = good.clone();
    bad["value"] = Value::String("12".into());
    assert!(!validator.is_valid(&bad));
    let mut unknown = good;
    unknown["operation"] = Value::String("frobnicate".into());
    assert!(!validator.is_valid(&unknown));
}

#[test]
fn parse_errors_exit_two_with_one_line() {
    let o = hrw(&["diff", "x^", "--at", "2"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.out.is_empty());
    assert_eq!(o.err.lines().count(), 1, "{}", o.err);
    assert!(o.err.starts_with("error[ParseError]: "), "{}", o.err);
    assert!(o.err.contains("offset"), "{}", o.err);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["diff", "x^3", "--at", "2", "--frobnicate"][..],
        &["integrate", "x", "--method", "simpson"],
        &["eval", "x+y", "--at", "x=1"],
        &["integrate", "x", "--mesh", "1/4", "--cells", "4"],
        &["integrate", "x", "--rect", "1,0"],
        &["diff", "x", "--at", "1/"],
        &[],
    ] {
        let o = hrw(args);
        assert_eq!(o.code, EXIT_USAGE, "{args:?}: {}", o.err);
        assert_eq!(o.err.lines().count(), 1, "{args:?}: {}", o.err);
        assert!(o.err.starts_with("error["), "{args:?}: {}", o.err);
    }
}

#[test]
fn math_errors_exit_one_naming_the_case() {
    for (args, name) in [
        (&["tangent", "1,1", "--at", "0"][..], "ZeroVelocity"),
        (&["diff", "abs(x)", "--at", "0"], "NonSmoothAtPoint"),
        (&["eval", "1/x", "--at", "x=0"], "DivisionByZero"),
        (&["diff", "x", "--at", "1/0"], "DivisionByZero"),
        (&["measure", "com", "--rho", "0", "--region", "x^2+y^2-1", "--cells", "4"], "ZeroMass"),
    ] {
        let o = hrw(args);
        assert_eq!(o.code, EXIT_MATH, "{args:?}: {}", o.err);
        assert_eq!(o.err.lines().count(), 1, "{args:?}: {}", o.err);
        assert!(o.err.starts_with(&format!("error[{name}]: ")), "{args:?}: {}", o.err);
    }
}

#[test]
fn help_and_version_succeed() {
    let o = hrw(&["--help"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.out.contains("probe-supernear"));
    let o = hrw(&["--version"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.out.starts_with("hrw "));
}

#[test]
fn repeated_invocations_are_byte_identical() {
    for args in [
        &["integrate", "sin(x*y)", "--rect", "0,1;0,2", "--cells", "8,16", "--tags", "seeded-random", "--seed", "3"][..],
        &["measure", "com", "--region", "x^2+y^2-1", "--rho", "1+x", "--cells", "16", "--format", "json"],
        &["jet", "tan(x)", "--at", "1/3", "--order", "5"],
    ] {
        let a = hrw(args);
        let b = hrw(args);
        assert_eq!(a.code, EXIT_OK, "{}", a.err);
        assert_eq!(a.out, b.out);
    }
}

#[test]
fn seeds_change_random_tags() {
    let sum = |seed: &str| {
        json(&["integrate", "x^2", "--cells", "16", "--tags", "seeded-random", "--seed", seed])["estimate"].clone()
    };
    assert_eq!(sum("1"), sum("1"));
    assert_ne!(sum("1"), sum("2"));
}

#[test]
fn constants_are_accepted_where_numbers_are_expected() {
    let v = json(&["measure", "impulse", "sin(t)", "--rect", "0,pi", "--cells", "32,64,128", "--oracle", "2"]);
    assert_eq!(v["params"]["rect"], "0,pi");
    assert!((q(&v["estimate"]) - 2.0).abs() < 1e-6);
}

fn binary(args: &[&str], precision: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hrw"));
    cmd.args(args).env_remove("HRW_PRECISION");
    if let Some(p) = precision {
        cmd.env("HRW_PRECISION", p);
    }
    cmd.output().unwrap()
}

#[test]
fn precision_comes_from_the_environment() {
    let args = ["diff", "exp(x)", "--at", "1", "--format", "json"];
    let value = |o: std::process::Output| {
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_slice::<Value>(&o.stdout).unwrap()["value"].clone()
    };
    let default = value(binary(&args, None));
    let coarse = value(binary(&args, Some("5")));
    assert_ne!(default, coarse);
    assert!((q(&coarse) - std::f64::consts::E).abs() < 1e-5);
    let mut flagged = args.to_vec();
    flagged.extend(["--precision", "5"]);
    assert_eq!(value(binary(&flagged, None)), coarse);
    assert_eq!(value(binary(&flagged, Some("30"))), coarse);
}

#[test]
fn process_exit_codes_and_streams() {
    let o = binary(&["diff", "x^3", "--at", "2"], None);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert_eq!(o.stdout, b"12\n");
    let o = binary(&["tangent", "1,1", "--at", "0"], None);
    assert_eq!(o.status.code(), Some(EXIT_MATH));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[ZeroVelocity]: "));
    let o = binary(&["nonsense"], None);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert_eq!(String::from_utf8_lossy(&o.stderr).lines().count(), 1);
}
