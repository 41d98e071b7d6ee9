use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use lfreason::session::SessionService;
use lfreason_cli::{report, server};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lfreason", version, about = "Proof assistant for reasoning about LF specifications")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every proof script in a theorem file.
    Check {
        signature: PathBuf,
        theorems: PathBuf,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
        /// Default depth for `search`.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Interactive tactic loop; `:help` lists commands.
    Repl {
        signature: PathBuf,
        theorems: PathBuf,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Serve proof sessions over HTTP and NDJSON.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        /// NDJSON port; defaults to the HTTP port plus one.
        #[arg(long)]
        ndjson_port: Option<u16>,
    },
}

/// Exit status of a command that ran to completion.
enum Verdict {
    AllProved,
    SomeFailed,
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn check_depth(depth: Option<usize>) -> anyhow::Result<()> {
    if depth == Some(0) {
        bail!("--depth must be at least 1");
    }
    Ok(())
}

fn check(sig: &Path, thm: &Path, format: Format, depth: Option<usize>) -> anyhow::Result<Verdict> {
    check_depth(depth)?;
    let reports = report::check(&read(sig)?, &read(thm)?, depth)?;
    match format {
        Format::Human => print!("{}", report::human(&reports)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report::json(&reports))?),
    }
    Ok(if reports.iter().all(|r| r.proved()) { Verdict::AllProved } else { Verdict::SomeFailed })
}

const REPL_HELP: &str = "\
commands:
  <tactic>.             apply a tactic to the focused goal
  :start NAME           start (or restart) a theorem
  :undo                 undo the last step
  :state                show the focused goal
  :goals                show all open goals
  :ground BOUND FORMULA check a closed formula over terms up to BOUND
  :theorems             list theorems
  :quit                 leave";

fn show(reply: &Value, format: Format, all_goals: bool, out: &mut impl Write) -> anyhow::Result<()> {
    if format == Format::Json {
        writeln!(out, "{}", serde_json::to_string(reply)?)?;
        return Ok(());
    }
    if reply["ok"] == false {
        writeln!(out, "error ({}): {}", reply["error"]["kind"].as_str().unwrap_or("?"), reply["error"]["message"].as_str().unwrap_or(""))?;
        return Ok(());
    }
    if let Some(r) = reply.get("result") {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
        return Ok(());
    }
    let Some(thm) = reply["theorem"].as_str() else {
        writeln!(out, "no theorem started; theorems: {}", reply["theorems"])?;
        return Ok(());
    };
    if reply["complete"] == true {
        writeln!(out, "{}: proved", thm)?;
        return Ok(());
    }
    let goals = reply["goals"].as_array().cloned().unwrap_or_default();
    let shown = if all_goals { &goals[..] } else { &goals[..goals.len().min(1)] };
    for g in shown {
        writeln!(out, "[{}] {}", g["label"].as_str().unwrap_or(""), g["text"].as_str().unwrap_or(""))?;
    }
    writeln!(out, "{} open goal(s)", goals.len())?;
    Ok(())
}

fn repl(sig: &Path, thm: &Path, format: Format, depth: Option<usize>) -> anyhow::Result<Verdict> {
    check_depth(depth)?;
    let svc = SessionService::new();
    let created = svc.handle(&json!({ "kind": "create_session", "signature": read(sig)?, "theorems": read(thm)?, "depth": depth }));
    if created["ok"] != true {
        bail!("{}", created["error"]["message"].as_str().unwrap_or("cannot create session"));
    }
    let id = created["session"].clone();
    let call = |mut req: Value| {
        req["session"] = id.clone();
        svc.handle(&req)
    };
    let mut out = std::io::stdout().lock();
    let started = match created["theorems"].as_array().and_then(|t| t.first()) {
        Some(first) => call(json!({ "kind": "start", "theorem": first })),
        None => call(json!({ "kind": "state" })),
    };
    show(&started, format, false, &mut out)?;
    for line in std::io::stdin().lock().lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let (cmd, rest) = line.split_once(char::is_whitespace).map_or((line, ""), |(c, r)| (c, r.trim()));
        let reply = match cmd {
            ":quit" => break,
            ":help" => {
                writeln!(out, "{}", REPL_HELP)?;
                continue;
            }
            ":theorems" => {
                writeln!(out, "{}", created["theorems"])?;
                continue;
            }
            ":start" => call(json!({ "kind": "start", "theorem": rest })),
            ":undo" => call(json!({ "kind": "undo" })),
            ":state" | ":goals" => call(json!({ "kind": "state" })),
            ":ground" => {
                let (bound, formula) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                match bound.parse::<u64>() {
                    Ok(b) => call(json!({ "kind": "ground_check", "formula": formula, "bound": b })),
                    Err(_) => json!({ "ok": false, "error": { "kind": "bad_request", "message": "usage: :ground BOUND FORMULA" } }),
                }
            }
            c if c.starts_with(':') => json!({ "ok": false, "error": { "kind": "bad_request", "message": format!("unknown command {}", c) } }),
            _ => call(json!({ "kind": "tactic", "tactic": line })),
        };
        show(&reply, format, cmd == ":goals", &mut out)?;
    }
    let state = call(json!({ "kind": "state" }));
    if format == Format::Human {
        if let Some(t) = state["theorem"].as_str() {
            let verdict = if state["complete"] == true { "proved".to_string() } else { format!("incomplete, {} open goal(s)", state["open_goals"]) };
            writeln!(out, "{}: {}", t, verdict)?;
        }
    }
    Ok(if state["complete"] == true { Verdict::AllProved } else { Verdict::SomeFailed })
}

fn serve(port: u16, ndjson_port: Option<u16>) -> anyhow::Result<Verdict> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let svc = Arc::new(SessionService::new());
        let ndjson_port = ndjson_port.unwrap_or(port.wrapping_add(1));
        let http = tokio::net::TcpListener::bind(("127.0.0.1", port)).await.with_context(|| format!("binding port {}", port))?;
        let nd = tokio::net::TcpListener::bind(("127.0.0.1", ndjson_port))
            .await
            .with_context(|| format!("binding port {}", ndjson_port))?;
        eprintln!("http on 127.0.0.1:{}, ndjson on 127.0.0.1:{}", port, ndjson_port);
        tokio::select! {
            r = server::serve_http(svc.clone(), http) => r?,
            r = server::serve_ndjson(svc, nd) => r?,
            _ = tokio::signal::ctrl_c() => {}
        }
        Ok(Verdict::AllProved)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Check { signature, theorems, format, depth } => check(&signature, &theorems, format, depth),
        Cmd::Repl { signature, theorems, format, depth } => repl(&signature, &theorems, format, depth),
        Cmd::Serve { port, ndjson_port } => serve(port, ndjson_port),
    };
    match r {
        Ok(Verdict::AllProved) => ExitCode::SUCCESS,
        Ok(Verdict::SomeFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}
