//! The `specdesk` batch driver and its HTTP data server.

pub mod args;
pub mod commands;
pub mod server;
pub mod session;

use std::io::Write;

use args::{Cli, Command};
use commands::{CliError, Exit};

/// Runs one parsed invocation. Results go to stdout, progress to stderr.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io = |e: std::io::Error| CliError::new(Exit::Io, e.to_string());
    match cli.command {
        Command::Analyze(a) => {
            let (settings, user) = a.resolve()?;
            let ui = commands::read_ui_bundle(std::env::var_os("SPECDESK_UI_BUNDLE").as_deref().map(std::path::Path::new));
            let o = commands::cmd_analyze(&settings, &user, ui.as_deref())?;
            eprintln!(
                "{} files, {} unreadable; {} clips; {} plots, {} failed",
                o.files_seen,
                o.file_failures,
                o.snapshot.manifest.inputs.len(),
                o.snapshot.plots.len(),
                o.plot_failures.len()
            );
            for w in &o.snapshot.manifest.assumption_audit {
                eprintln!("warning: {}", commands::format_warning(w));
            }
            for p in &o.written {
                writeln!(out, "{}", p.display()).map_err(io)?;
            }
        }
        Command::Grid(a) => {
            let (settings, user) = a.resolve()?;
            let o = commands::cmd_grid(&settings, &user)?;
            for g in &o.grids {
                let ok = g.cells.iter().filter(|c| c.succeeded()).count();
                let best = g.best_cell.map(|i| &g.cells[i]);
                match best {
                    Some(c) => eprintln!(
                        "{} {}: {ok}/{} cells, best n_fft={} hop={}",
                        o.clip_id,
                        g.method,
                        g.cells.len(),
                        c.n_fft,
                        c.hop_length
                    ),
                    None => eprintln!("{} {}: every cell failed", o.clip_id, g.method),
                }
            }
            for p in &o.written {
                writeln!(out, "{}", p.display()).map_err(io)?;
            }
        }
        Command::Sample(s) => {
            let (settings, _) = s.run.resolve()?;
            for id in commands::cmd_sample(&settings, s.k)? {
                writeln!(out, "{id}").map_err(io)?;
            }
        }
        Command::Audit(a) => {
            let (settings, user) = a.resolve()?;
            let warnings = commands::cmd_audit(&settings, &user)?;
            if warnings.is_empty() {
                eprintln!("no assumption warnings");
            }
            for w in &warnings {
                writeln!(out, "{}", commands::format_warning(w)).map_err(io)?;
            }
        }
        Command::Serve(s) => {
            let port = s.port.unwrap_or(specdesk_core::config::RunSettings::default().port);
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(io)?;
            rt.block_on(server::serve(&s.run_dir, &s.host, port, s.static_dir))
                .map_err(|e| CliError::new(Exit::Io, format!("{e:#}")))?;
        }
    }
    Ok(())
}
