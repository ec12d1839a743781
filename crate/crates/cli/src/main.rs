use std::process::ExitCode;

use clap::Parser;
use prismatic_cli::{run_suite, Args, SuiteConfig, CONFIG_ERROR};

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match SuiteConfig::from_args(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("prismatic: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let report = run_suite(&cfg);
    if let Err(e) = report.emit(args.report.as_deref()) {
        eprintln!("prismatic: cannot write report: {e}");
        return ExitCode::from(CONFIG_ERROR);
    }
    let s = report.summary;
    eprintln!(
        "{}: {} pass, {} fail, {} inconclusive",
        cfg.suite.name(),
        s.pass,
        s.fail,
        s.inconclusive
    );
    ExitCode::from(report.exit_status())
}
