use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitCode, Stdio};

use clap::{Parser, Subcommand};
use echo_core::{parse, parse_entry, DebugSession, NavigationMap, DEFAULT_MAX_STEPS};
use echo_wire::{DebuggeeServer, ServeError};
use echodbg::diagnostics;
use echodbg::{ApiServer, Controller, ControllerError};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_PORT_IN_USE: u8 = 3;
const EXIT_ENDPOINT_DOWN: u8 = 4;

#[derive(Parser)]
#[command(
    name = "echodbg",
    version,
    about = "Echo debugging: compare a working and a failing execution"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Serve one program as a debuggee on POST /rpc.
    Serve {
        program: PathBuf,
        /// Statement to execute, e.g. "PCBTest.new().run()".
        #[arg(long)]
        entry: String,
        /// 0 picks a free port; the bound address is printed on stdout.
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        budget: u64,
        /// Exit when stdin closes (used by `demo` to tie children to it).
        #[arg(long, hide = true)]
        exit_on_stdin_eof: bool,
    },
    /// Collect both traces, map divergences and convergences, print the table.
    Analyze {
        #[arg(long)]
        working: String,
        #[arg(long)]
        failing: String,
        /// Write the navigation map JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Step budget for trace collection (defaults to each server's own).
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Serve the controller API (and the UI placeholder) over two debuggees.
    Session {
        #[arg(long)]
        working: String,
        #[arg(long)]
        failing: String,
        #[arg(long, default_value_t = 7000)]
        ui_port: u16,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Start both debuggees locally, analyze, then serve the controller API.
    Demo {
        #[arg(long)]
        working: PathBuf,
        #[arg(long)]
        failing: PathBuf,
        #[arg(long)]
        entry: String,
        #[arg(long, default_value_t = 7000)]
        ui_port: u16,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Serve {
            program,
            entry,
            port,
            host,
            budget,
            exit_on_stdin_eof,
        } => serve(&program, &entry, &host, port, budget, exit_on_stdin_eof),
        Cmd::Analyze {
            working,
            failing,
            out,
            budget,
        } => analyze(&working, &failing, out.as_deref(), budget),
        Cmd::Session {
            working,
            failing,
            ui_port,
            budget,
        } => session(&working, &failing, ui_port, budget),
        Cmd::Demo {
            working,
            failing,
            entry,
            ui_port,
            budget,
            out,
        } => demo(&working, &failing, &entry, ui_port, budget, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

fn load_session(program: &Path, entry: &str, budget: u64) -> Result<DebugSession, u8> {
    let src = std::fs::read_to_string(program).map_err(|e| {
        eprintln!("echodbg: cannot read {}: {e}", program.display());
        EXIT_FAILURE
    })?;
    let parsed = parse(&src).map_err(|e| {
        eprint!("{}", diagnostics::render(&program.display().to_string(), &src, &e));
        EXIT_PARSE
    })?;
    let parsed = std::sync::Arc::new(parsed);
    let entry_code = parse_entry(entry, &parsed).map_err(|e| {
        eprint!("{}", diagnostics::render("<entry>", entry, &e));
        EXIT_PARSE
    })?;
    Ok(DebugSession::with_max_steps(parsed, entry_code, budget))
}

fn serve_error(e: ServeError) -> u8 {
    eprintln!("echodbg: {e}");
    match e {
        ServeError::AddrInUse(_) => EXIT_PORT_IN_USE,
        ServeError::Io { .. } => EXIT_FAILURE,
    }
}

fn controller_error(e: ControllerError) -> u8 {
    eprintln!("echodbg: {e}");
    if e.is_transport() {
        EXIT_ENDPOINT_DOWN
    } else {
        EXIT_FAILURE
    }
}

fn serve(program: &Path, entry: &str, host: &str, port: u16, budget: u64, exit_on_stdin_eof: bool) -> Result<(), u8> {
    let session = load_session(program, entry, budget)?;
    let server = DebuggeeServer::bind(session, format!("{host}:{port}")).map_err(serve_error)?;
    println!("listening on http://{}", server.local_addr());
    let _ = std::io::stdout().flush();
    if exit_on_stdin_eof {
        std::thread::spawn(|| {
            let _ = std::io::stdin().read_to_end(&mut Vec::new());
            std::process::exit(0);
        });
    }
    server.run();
    Ok(())
}

fn run_analysis(controller: &mut Controller, out: Option<&Path>) -> Result<NavigationMap, u8> {
    controller.check_health().map_err(controller_error)?;
    let map = controller.analyze().map_err(controller_error)?.clone();
    if let Some(path) = out {
        std::fs::write(path, map.to_json()).map_err(|e| {
            eprintln!("echodbg: cannot write {}: {e}", path.display());
            EXIT_FAILURE
        })?;
    }
    print!("{}", map.render_table());
    Ok(map)
}

fn analyze(working: &str, failing: &str, out: Option<&Path>, budget: Option<u64>) -> Result<(), u8> {
    let mut controller = Controller::connect(working, failing, budget).map_err(controller_error)?;
    run_analysis(&mut controller, out).map(drop)
}

fn serve_api(controller: Controller, ui_port: u16) -> Result<(), u8> {
    let api = ApiServer::bind(controller, &format!("127.0.0.1:{ui_port}")).map_err(serve_error)?;
    println!("controller API on http://{}", api.local_addr());
    let _ = std::io::stdout().flush();
    api.run();
    Ok(())
}

fn session(working: &str, failing: &str, ui_port: u16, budget: Option<u64>) -> Result<(), u8> {
    let controller = Controller::connect(working, failing, budget).map_err(controller_error)?;
    controller.check_health().map_err(controller_error)?;
    serve_api(controller, ui_port)
}

/// Kills the child debuggees when the demo exits.
struct Children(Vec<Child>);

impl Drop for Children {
    fn drop(&mut self) {
        for child in &mut self.0 {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

fn spawn_debuggee(program: &Path, entry: &str, budget: u64) -> Result<(Child, String), u8> {
    let exe = std::env::current_exe().map_err(|e| {
        eprintln!("echodbg: cannot locate own executable: {e}");
        EXIT_FAILURE
    })?;
    let mut child = Command::new(exe)
        .arg("serve")
        .arg(program)
        .args([
            "--entry",
            entry,
            "--port",
            "0",
            "--budget",
            &budget.to_string(),
            "--exit-on-stdin-eof",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| {
            eprintln!("echodbg: cannot start debuggee: {e}");
            EXIT_FAILURE
        })?;
    let mut line = String::new();
    let stdout = child.stdout.take().expect("piped stdout");
    let _ = BufReader::new(stdout).read_line(&mut line);
    match line.trim().strip_prefix("listening on ") {
        Some(url) => Ok((child, url.to_string())),
        None => {
            let status = child.wait().ok().and_then(|s| s.code()).unwrap_or(1);
            Err(u8::try_from(status).unwrap_or(EXIT_FAILURE))
        }
    }
}

fn demo(working: &Path, failing: &Path, entry: &str, ui_port: u16, budget: u64, out: Option<&Path>) -> Result<(), u8> {
    // report parse errors before starting anything
    load_session(working, entry, budget)?;
    load_session(failing, entry, budget)?;
    let mut children = Children(Vec::new());
    let (w, w_url) = spawn_debuggee(working, entry, budget)?;
    children.0.push(w);
    let (f, f_url) = spawn_debuggee(failing, entry, budget)?;
    children.0.push(f);
    println!("working debuggee on {w_url}\nfailing debuggee on {f_url}");
    let mut controller = Controller::connect(&w_url, &f_url, None).map_err(controller_error)?;
    run_analysis(&mut controller, out)?;
    serve_api(controller, ui_port)
}
