use std::process::ExitCode;

use clap::Parser;
use igk_cli::cli::{Cli, Command};
use igk_cli::commands::{cmd_bench, cmd_gen, cmd_plot, cmd_run, cmd_sweep};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(o) => o.resolve().and_then(|cfg| cmd_run(&cfg)).map(|out| {
            let early = out.metrics.iter().filter(|m| m.early_stop).count();
            if early > 0 {
                eprintln!(
                    "warning: {early} run(s) stopped early: too few points left for k clusters"
                );
            }
            for f in &out.files {
                println!("{}", f.display());
            }
        }),
        Command::Bench(b) => b
            .resolve()
            .and_then(|cfg| cmd_bench(&cfg))
            .map(|out| print!("{}", out.table)),
        Command::Sweep(s) => s
            .resolve()
            .and_then(|cfg| cmd_sweep(&cfg, s.plot.as_deref()))
            .map(|rows| {
                println!("threshold,mse_median,removed_median");
                for r in rows {
                    println!("{},{},{}", r.threshold, r.mse_median, r.removed_median);
                }
            }),
        Command::Gen(g) => cmd_gen(&g.spec(), &g.data_out, &g.truth_out).map(|(n, m)| {
            println!("wrote {n} points and {m} centers");
        }),
        Command::Plot(p) => cmd_plot(&p.spec()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
