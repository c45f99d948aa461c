mod render;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fexpand_core::algsolve::Budget;
use fexpand_core::pipeline::{derive, PipelineConfig, Problem};
use fexpand_core::verify::{bundled, verify_corpus, verify_text, Fixture, Verdict};

const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "fexpand", version, about = "Exact travelling-wave solutions by function expansion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Travelling-wave reduction of a PDE to an ODE.
    Reduce {
        equation: String,
        #[command(flatten)]
        common: Common,
    },
    /// Expansion orders balancing the highest derivative against the nonlinearity.
    Balance {
        equation: String,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ansatz: AnsatzArgs,
    },
    /// Full derivation: ansatz, algebraic system, solution families, closed forms.
    Solve {
        equation: String,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ansatz: AnsatzArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Verifies one solution, or every fixture in a file.
    Verify {
        #[arg(allow_hyphen_values = true)]
        equation: Option<String>,
        /// Leading minus signs are part of the value, not a flag.
        #[arg(allow_hyphen_values = true)]
        solution: Option<String>,
        /// Relations `sym^2=value` adjoined exactly.
        #[arg(long, value_delimiter = ',')]
        relations: Vec<String>,
        #[arg(long)]
        fixtures: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Verifies the bundled corpus of published solutions (or a fixture file).
    Corpus {
        #[arg(long)]
        fixtures: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Symbolic parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    params: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct AnsatzArgs {
    /// Auxiliary system `NAME[:k=v,...]`.
    #[arg(long, default_value = "tanh")]
    aux: String,
    #[arg(long)]
    arity: Option<usize>,
    #[arg(long, default_value_t = 12)]
    max_order: u32,
    /// Per-kernel orders, skipping the balance.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<u32>>,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    max_branches: Option<usize>,
    #[arg(long)]
    timeout_seconds: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Latex,
}

fn config(common: &Common, ansatz: &AnsatzArgs, budget: Option<&BudgetArgs>) -> PipelineConfig {
    let mut b = Budget::default();
    if let Some(args) = budget {
        if let Some(d) = args.max_depth {
            b.max_depth = d;
        }
        if let Some(n) = args.max_branches {
            b.max_branches = n;
        }
        b.timeout = args.timeout_seconds.map(Duration::from_secs);
    }
    PipelineConfig {
        aux: ansatz.aux.clone(),
        arity: ansatz.arity,
        orders: ansatz.orders.clone(),
        max_order: ansatz.max_order,
        params: common.params.clone(),
        budget: b,
    }
}

/// What a command printed and its exit status; `main` writes it out.
#[derive(Debug, Default)]
struct Outcome {
    code: u8,
    stdout: String,
    stderr: String,
}

impl Outcome {
    fn emit(&mut self, text: &str) {
        self.stdout.push_str(text);
        self.stdout.push('\n');
    }

    fn exit(mut self, code: u8) -> Outcome {
        self.code = code;
        self
    }

    /// Every pipeline failure, a missing balance included, is fixed by
    /// changing the input.
    fn input_error(mut self, msg: impl std::fmt::Display) -> Outcome {
        self.stderr.push_str(&format!("error: {msg}\n"));
        self.exit(EXIT_INPUT)
    }
}

fn load_fixtures(path: &str) -> Result<Vec<Fixture>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
    let fixtures = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|f| vec![f])
    };
    fixtures.map_err(|e| format!("{path}: {e}"))
}

fn run(cli: Cli) -> Outcome {
    let mut o = Outcome::default();
    match cli.command {
        Command::Reduce { equation, common } => {
            let cfg = PipelineConfig {
                params: common.params.clone(),
                ..PipelineConfig::default()
            };
            match Problem::new(&equation, &cfg) {
                Ok(p) => {
                    o.emit(&render::reduce(&equation, &p, common.format));
                    o
                }
                Err(e) => o.input_error(e),
            }
        }
        Command::Balance { equation, common, ansatz } => {
            let cfg = config(&common, &ansatz, None);
            let result = Problem::new(&equation, &cfg).and_then(|p| p.balance(cfg.max_order).map(|b| (p, b)));
            match result {
                Ok((p, b)) => {
                    o.emit(&render::balance(&equation, &p, &b, common.format));
                    o
                }
                Err(e) => o.input_error(e),
            }
        }
        Command::Solve {
            equation,
            common,
            ansatz,
            budget,
        } => {
            let cfg = config(&common, &ansatz, Some(&budget));
            match derive(&equation, &cfg) {
                Ok(d) => {
                    o.emit(&render::solve(&equation, &d, common.format));
                    if d.budget_exhausted() {
                        o.exit(EXIT_BUDGET)
                    } else if d.families.iter().any(|f| f.verdict == Some(Verdict::Nonzero)) {
                        o.exit(EXIT_VERIFY)
                    } else {
                        o
                    }
                }
                Err(e) => o.input_error(e),
            }
        }
        Command::Verify {
            equation,
            solution,
            relations,
            fixtures,
            common,
        } => match (fixtures, equation, solution) {
            (Some(path), None, None) => match load_fixtures(&path) {
                Ok(fx) => corpus(o, &fx, common.format),
                Err(e) => o.input_error(e),
            },
            (None, Some(eq), Some(sol)) => {
                let params: Vec<&str> = common.params.iter().map(String::as_str).collect();
                let rels: Vec<&str> = relations.iter().map(String::as_str).collect();
                match verify_text(&eq, &sol, &params, &rels) {
                    Ok(r) => {
                        o.emit(&render::verdict(&eq, &sol, &r, common.format));
                        if r.verdict == Verdict::Zero {
                            o
                        } else {
                            o.exit(EXIT_VERIFY)
                        }
                    }
                    Err(e) => o.input_error(e),
                }
            }
            _ => o.input_error("verify takes either EQUATION SOLUTION or --fixtures PATH"),
        },
        Command::Corpus { fixtures, common } => {
            let fx = match fixtures {
                Some(path) => match load_fixtures(&path) {
                    Ok(fx) => fx,
                    Err(e) => return o.input_error(e),
                },
                None => bundled(),
            };
            corpus(o, &fx, common.format)
        }
    }
}

fn corpus(mut o: Outcome, fixtures: &[Fixture], format: Format) -> Outcome {
    let summary = verify_corpus(fixtures);
    o.emit(&render::corpus(&summary, format));
    if summary.passed() {
        o
    } else {
        o.exit(EXIT_VERIFY)
    }
}

fn main() -> ExitCode {
    let o = run(Cli::parse());
    // a closed pipe (as with `| head`) is not an error
    let _ = std::io::stdout().lock().write_all(o.stdout.as_bytes());
    let _ = std::io::stderr().lock().write_all(o.stderr.as_bytes());
    ExitCode::from(o.code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::{json, Value};

    const BF: &str = "u_xx + u*u_x - u_t + u - u^2 = 0";
    const ITO: &str = "u_t + 2*u^2*u_x + 6*u_x*u_xx + 3*u*u_xxx + u_xxxxx = 0";

    fn call(args: &[&str]) -> Outcome {
        run(Cli::try_parse_from(std::iter::once("fexpand").chain(args.iter().copied())).unwrap())
    }

    fn doc(args: &[&str]) -> Value {
        let o = call(args);
        serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", o.stderr))
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["verify", "u_t + u_x = 0", "tanh(t - x)"]).code, 0);
        assert_eq!(call(&["verify", "u_t + u_x = 0", "tanh(t + x)"]).code, EXIT_VERIFY);
        assert_eq!(call(&["reduce", "u_t + = 0"]).code, EXIT_INPUT);
        assert_eq!(call(&["verify", "--fixtures", "/nonexistent/fixtures.json"]).code, EXIT_INPUT);
        assert_eq!(call(&["verify", "u_t + u_x = 0"]).code, EXIT_INPUT);
        assert_eq!(call(&["balance", BF, "--aux", "exp"]).code, EXIT_INPUT);
        assert_eq!(call(&["solve", BF, "--max-branches", "2"]).code, EXIT_BUDGET);
    }

    #[test]
    fn errors_go_to_stderr() {
        let o = call(&["reduce", "u_t + = 0"]);
        assert!(o.stdout.is_empty());
        assert!(o.stderr.starts_with("error: "), "{}", o.stderr);
    }

    #[test]
    fn reduce_and_balance_report_json() {
        let r = doc(&["reduce", BF, "--format", "json"]);
        assert_eq!(r["command"], "reduce");
        assert_eq!(r["schema_version"], 1);
        assert_eq!(r["order"], 2);
        assert_eq!(r["wave_params"], json!(["alpha", "beta"]));
        let b = doc(&["balance", BF, "--format", "json"]);
        assert_eq!(b["orders"], json!([1]));
    }

    /// Every solution printed by `solve` verifies again through `verify`,
    /// with its free symbols declared as parameters.
    fn round_trip(eq: &str) {
        let d = doc(&["solve", eq, "--format", "json"]);
        assert_eq!(d["complete"], true);
        let families = d["families"].as_array().unwrap();
        assert!(!families.is_empty());
        for f in families {
            let sol = f["solution"].as_str().unwrap();
            let free: Vec<&str> = f["free"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
            let params = free.join(",");
            let mut args = vec!["verify", eq, sol];
            if !free.is_empty() {
                args.extend(["--params", &params]);
            }
            let o = call(&args);
            assert_eq!(o.code, 0, "{sol}: {}", o.stdout);
        }
        for p in d["eps_pairs"].as_array().unwrap() {
            let sol = p["solution"].as_str().unwrap();
            let o = call(&["verify", eq, sol, "--params", "eps", "--relations", "eps^2=1"]);
            assert_eq!(o.code, 0, "{sol}: {}", o.stdout);
        }
    }

    #[test]
    fn solve_output_verifies_through_verify() {
        round_trip(BF);
        round_trip(ITO);
    }

    #[test]
    fn fixture_files_are_checked_entry_by_entry() {
        let dir = std::env::temp_dir().join(format!("fexpand-unit-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("fx.json");
        let fx = json!([
            {"name": "transport/right", "equation": "u_t + u_x = 0", "solution": "tanh(t - x)"},
            {"name": "transport/wrong", "equation": "u_t + u_x = 0", "solution": "tanh(t + x)"}
        ]);
        fs::write(&path, fx.to_string()).unwrap();
        let o = call(&["verify", "--fixtures", path.to_str().unwrap(), "--format", "json"]);
        assert_eq!(o.code, EXIT_VERIFY);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["total"], 2);
        assert_eq!(v["zero"], 1);
        // a single object is accepted as a one-entry file
        fs::write(&path, fx[0].to_string()).unwrap();
        assert_eq!(call(&["corpus", "--fixtures", path.to_str().unwrap()]).code, 0);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn latex_output_uses_latex_functions() {
        let o = call(&["solve", BF, "--format", "latex"]);
        assert!(o.stdout.contains("\\tanh"), "{}", o.stdout);
    }

    #[test]
    fn leading_minus_is_a_value() {
        assert_eq!(call(&["verify", BF, "-1/2*tanh(-1/2*t) + 1/2"]).code, 0);
    }
}
