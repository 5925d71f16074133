use bmfl::cli::{run, EXIT_CAPACITY, EXIT_OK, EXIT_VALIDATION};

fn run_args(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bmfl").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(err).unwrap())
}

// Single test: the dimension cap and the environment are process-global.
#[test]
fn dimension_cap_from_environment_and_flag() {
    let m = format!("{}/models/dimer_repulsive.json", env!("CARGO_MANIFEST_DIR"));
    std::env::set_var("BMFL_DIM_CAP", "3");
    let (code, err) = run_args(&["ground", "--model", &m, "--n", "4"]);
    assert_eq!(code, EXIT_CAPACITY);
    assert!(err.contains("cap is 3"), "{err}");

    std::env::set_var("BMFL_DIM_CAP", "zero");
    let (code, err) = run_args(&["ground", "--model", &m, "--n", "4"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("BMFL_DIM_CAP"));

    std::env::remove_var("BMFL_DIM_CAP");
    assert_eq!(run_args(&["ground", "--model", &m, "--n", "4"]).0, EXIT_OK);
    assert_eq!(
        run_args(&["ground", "--model", &m, "--n", "4", "--dim-cap", "4"]).0,
        EXIT_CAPACITY
    );
    assert_eq!(run_args(&["ground", "--model", &m, "--n", "4"]).0, EXIT_OK);
}
