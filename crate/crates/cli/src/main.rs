use std::process::ExitCode;

use clap::Parser;
use hapticopter_cli::{compare, pulses, replay, resolve_scenario, run, stats, Cli, Command};
use hapticopter_gateway::ServerConfig;
use serde::Serialize;

fn print_json<T: Serialize>(v: &T) -> hapticopter_core::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args).map(|o| {
            for f in &o.failures {
                eprintln!("{f}");
            }
            eprintln!("{} rows -> {} ({} timed out)", o.rows.len(), o.table.display(), o.timeouts);
            if args.strict && o.timeouts > 0 {
                return ExitCode::from(2);
            }
            if o.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }),
        Command::Compare(args) => compare(args).and_then(|c| print_json(&c)).map(|_| ExitCode::SUCCESS),
        Command::Stats(args) => stats(args).and_then(|r| print_json(&r)).map(|_| ExitCode::SUCCESS),
        Command::Pulses(args) => pulses(args).and_then(|p| print_json(&p)).map(|_| ExitCode::SUCCESS),
        Command::Replay(args) => replay(args).map(|row| {
            eprintln!("{} completed={} collisions={}", row.task, row.completed, row.collisions);
            ExitCode::SUCCESS
        }),
        Command::Serve(args) => serve(args),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}

fn serve(args: &hapticopter_cli::ServeArgs) -> hapticopter_core::Result<ExitCode> {
    let config = ServerConfig::new(resolve_scenario(&args.scenario)?).with_env();
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let addr = hapticopter_gateway::server::spawn((args.host, args.port).into(), config).await?;
        eprintln!("listening on ws://{addr}/session");
        tokio::signal::ctrl_c().await
    })?;
    Ok(ExitCode::SUCCESS)
}
