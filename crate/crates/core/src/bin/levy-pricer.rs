use clap::Parser;

use levy_pricer::cli::{run, RunConfig};

fn main() {
    let config = RunConfig::parse();
    let (code, doc) = run(config);
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable output"));
    std::process::exit(code);
}
