//! Runs a config file through the same path as the binary.
//!
//! `cargo run --example run_config -- ldp-scan configs/iid_pareto_ldp.ini`

use std::path::PathBuf;

use heavytail::cli::{parse_config, run, verify_manifest, Command, RunRequest};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let command = args.get(1).and_then(|c| Command::parse(c)).unwrap_or(Command::Report);
    let path = args.get(2).cloned().unwrap_or_else(|| "configs/kesten_report.ini".into());
    let text = std::fs::read_to_string(&path).expect("readable config");
    let config = match parse_config(&text, Some(command)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let out_dir = std::env::temp_dir().join(PathBuf::from("heavytail-example"));
    let req = RunRequest {
        command,
        seed: config.seed.unwrap_or(1),
        config,
        out_dir: out_dir.clone(),
        threads: None,
    };
    match run(&req) {
        Ok(m) => {
            for a in &m.artifacts {
                println!("{}  {}  {} bytes", a.sha256, a.path, a.bytes);
            }
            println!("digest mismatches: {:?}", verify_manifest(&out_dir, &m));
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
