//! Drive the command-line front end from code: the same verbs the binary
//! exposes, writing into a temp directory.

fn main() {
    let out = std::env::temp_dir().join("trajlink-example");
    let out = out.to_str().unwrap();
    for engine in ["linear", "wrtree"] {
        let dir = format!("{out}/{engine}");
        let code = trajlink::cli::main_with_args([
            "trajlink", "pipeline", "--synthetic", "n=300,points=800", "--engine", engine, "--m", "10", "--k", "5",
            "--out", &dir,
        ]);
        assert_eq!(code, 0);
    }
    let a = std::fs::read(format!("{out}/linear/results.csv")).unwrap();
    let b = std::fs::read(format!("{out}/wrtree/results.csv")).unwrap();
    println!("results identical across engines: {}", a == b);

    let code = trajlink::cli::main_with_args([
        "trajlink", "pipeline", "--signature-type", "spatiotemporal", "--dt", "5", "--out", out,
    ]);
    println!("dt=5 exits with {code}");
}
