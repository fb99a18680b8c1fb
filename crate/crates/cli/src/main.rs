use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ordal::nf::normal_forms;
use ordal::parse::{parse_ctx, parse_prop, parse_seq_deriv, parse_sequent};
use ordal::translate::{nd_to_seq, seq_to_nd};
use ordal::workspace::{parse_workspace, Workspace};
use ordal::{
    check_seq, decide_small, eliminate_cuts, expand_identity, CheckOptions, SearchBudget, UnorderedCtx, Verdict,
};

mod check;
mod selftest;

#[derive(Parser)]
#[command(name = "ordal", version, about = "Checker and prover for ordered adjoint logic")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Nd,
    Seq,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every proof block in a file.
    Check {
        file: PathBuf,
        /// Restrict the identity rule to atoms.
        #[arg(long)]
        atomic_id: bool,
        /// Add mobility implied by weakening and contraction.
        #[arg(long)]
        complete_sigma: bool,
        /// Print the computed context sets of skeleton blocks.
        #[arg(long)]
        emit_xi: bool,
        /// Write explicit derivations for skeleton blocks to this file.
        #[arg(long, value_name = "OUT")]
        elaborate: Option<PathBuf>,
        /// One JSON record per theorem.
        #[arg(long)]
        json: bool,
    },
    /// Search for a cut-free sequent derivation.
    Prove {
        #[arg(long)]
        sig: PathBuf,
        sequent: String,
        #[arg(long, env = "ORDAL_DEPTH", default_value_t = 12)]
        depth: usize,
    },
    /// Print the normal forms of an ordered context.
    Nf {
        #[arg(long)]
        sig: PathBuf,
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        mode: String,
        #[arg(long)]
        omega: String,
    },
    /// Eliminate all cuts from a sequent derivation.
    CutElim {
        #[arg(long)]
        sig: PathBuf,
        sequent: String,
        derivation: String,
    },
    /// Expand an identity into atomic ones.
    ExpandId {
        #[arg(long)]
        sig: PathBuf,
        prop: String,
        #[arg(long, default_value = "x")]
        var: String,
    },
    /// Translate between sequent calculus and natural deduction.
    Translate {
        #[arg(long)]
        to: Target,
        #[arg(long)]
        sig: PathBuf,
        sequent: String,
        derivation: String,
    },
    /// Run the bundled fixtures.
    Selftest,
}

enum Error {
    /// Bad input: exit 2.
    Input(String),
    /// A check failed: exit 1.
    Check(String),
}

type Result<T> = std::result::Result<T, Error>;

fn load(path: &Path, complete_sigma: bool) -> Result<Workspace> {
    let src = fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_workspace(&src, complete_sigma).map_err(|e| Error::Input(format!("{}:{e}", path.display())))
}

fn input<T, E: std::fmt::Display>(what: &str, r: std::result::Result<T, E>) -> Result<T> {
    r.map_err(|e| Error::Input(format!("{what}: {e}")))
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Check {
            file,
            atomic_id,
            complete_sigma,
            emit_xi,
            elaborate,
            json,
        } => {
            let ws = load(&file, complete_sigma)?;
            let opts = check::Options {
                atomic_id,
                elaborate: elaborate.is_some(),
            };
            let reports = check::check_workspace(&ws, opts);
            let t = &ws.sig.theory;
            let mut elaborated = String::new();
            for r in &reports {
                if json {
                    println!("{}", serde_json::to_string(&r.json()).expect("serializable record"));
                } else if r.blocks.is_empty() {
                    println!("open {} (no proof)", r.name);
                }
                for b in &r.blocks {
                    if !json {
                        match &b.failure {
                            None => println!("ok   {} ({}, line {})", r.name, b.tag, b.line),
                            Some(f) => println!(
                                "FAIL {} ({}, line {}): {}",
                                r.name, b.tag, b.line, f.message
                            ),
                        }
                        if let (true, Some(xi)) = (emit_xi, &b.xi) {
                            if xi.is_empty() {
                                println!("     xi: {{}}");
                            }
                            for c in xi {
                                println!("     xi: {}", c.display(t));
                            }
                        }
                    }
                    if let Some(d) = &b.elaborated {
                        elaborated.push_str(&format!("proof {} nd = {} end\n", r.name, d.to_sexp(t)));
                    }
                }
            }
            if let Some(out) = elaborate {
                fs::write(&out, elaborated).map_err(|e| Error::Input(format!("{}: {e}", out.display())))?;
            }
            if reports.iter().all(check::TheoremReport::ok) {
                Ok(())
            } else {
                Err(Error::Check(String::new()))
            }
        }
        Cmd::Prove { sig, sequent, depth } => {
            let ws = load(&sig, false)?;
            let s = input("sequent", parse_sequent(&ws.sig, &sequent))?;
            match decide_small(&ws.sig.theory, &s, SearchBudget::depth(depth)) {
                Verdict::Provable(d) => {
                    println!("{}", d.to_sexp(&ws.sig.theory));
                    Ok(())
                }
                Verdict::NotProvable => {
                    println!("unprovable");
                    Err(Error::Check(String::new()))
                }
                Verdict::Unknown => {
                    println!("unknown");
                    Err(Error::Check(String::new()))
                }
            }
        }
        Cmd::Nf {
            sig,
            gamma,
            mode,
            omega,
        } => {
            let ws = load(&sig, false)?;
            let t = &ws.sig.theory;
            let g = input("gamma", parse_ctx(&ws.sig, &gamma))?;
            if !g.is_normal() {
                return Err(Error::Input("gamma: a variable is declared twice".into()));
            }
            let r = input("mode", t.lookup(&mode))?;
            let o = input("omega", parse_ctx(&ws.sig, &omega))?;
            let nf = input("omega", normal_forms(t, &UnorderedCtx::from(&g), r, &o))?;
            print!("{}", nf.display(t));
            Ok(())
        }
        Cmd::CutElim {
            sig,
            sequent,
            derivation,
        } => {
            let ws = load(&sig, false)?;
            let t = &ws.sig.theory;
            let s = input("sequent", parse_sequent(&ws.sig, &sequent))?;
            let d = input("derivation", parse_seq_deriv(&ws.sig, &derivation))?;
            let r = eliminate_cuts(t, &d, &s).map_err(|e| Error::Check(e.to_string()))?;
            println!("{}", r.to_sexp(t));
            Ok(())
        }
        Cmd::ExpandId { sig, prop, var } => {
            let ws = load(&sig, false)?;
            let t = &ws.sig.theory;
            let a = input("proposition", parse_prop(&ws.sig, &prop))?;
            let d = expand_identity(t, &a, &var).map_err(|e| Error::Check(e.to_string()))?;
            println!("{}", d.to_sexp(t));
            Ok(())
        }
        Cmd::Translate {
            to,
            sig,
            sequent,
            derivation,
        } => {
            let ws = load(&sig, false)?;
            let t = &ws.sig.theory;
            let s = input("sequent", parse_sequent(&ws.sig, &sequent))?;
            match to {
                Target::Nd => {
                    let d = input("derivation", parse_seq_deriv(&ws.sig, &derivation))?;
                    let nd = seq_to_nd(t, &d, &s).map_err(|e| Error::Check(e.to_string()))?;
                    println!("{}", nd.to_sexp(t));
                }
                Target::Seq => {
                    let d = input("derivation", ordal::nd::parse_nd_deriv(&ws.sig, &derivation))?;
                    let gamma = UnorderedCtx::from(&s.ctx);
                    let (sd, end) = nd_to_seq(t, &d, &gamma, &s.goal).map_err(|e| Error::Check(e.to_string()))?;
                    if end != s {
                        return Err(Error::Check(format!(
                            "derivation proves {}, not the given sequent",
                            end.display(t)
                        )));
                    }
                    check_seq(t, &sd, &s, CheckOptions::default()).map_err(|e| Error::Check(e.to_string()))?;
                    println!("{}", sd.to_sexp(t));
                }
            }
            Ok(())
        }
        Cmd::Selftest => {
            if selftest::run() {
                Ok(())
            } else {
                Err(Error::Check(String::new()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Check(msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(1)
        }
        Err(Error::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
