//! `uadl`: check usage-aware proofs and act on the mutations they admit.
//!
//! Exit codes: 0 ok, 1 other errors, 2 proof failure, 3 parse error,
//! 4 mutation choice outside the proof's set.

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use uadl_core::calculus::{parse_script_str, AnnotatedProof, Checker, Mode, ProofNode};
use uadl_core::diagnostics::{self, admissible, build_report, capped_choices, verify_relaxation, ReplayError};
use uadl_core::labelsets::{MutationChoice, MutationKind, TrackedLabelSet};
use uadl_core::mutation::{apply, DefaultProvider};
use uadl_core::oracle::{oracle_from_spec, Oracle};
use uadl_core::syntax::{parse_model, print_atom, print_model, print_sequent_labeled, Fml};

const FIXTURE_DIR_VAR: &str = "UADL_FIXTURE_DIR";

#[derive(Parser)]
#[command(name = "uadl", version, about = "Usage-aware proof checking for differential dynamic logic")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a proof script and print the root label set.
    Check(Common),
    /// Apply a mutation choice from the root set to the model.
    Apply {
        #[command(flatten)]
        common: Common,
        /// Choice file: {"choice": {"j": "R"}, "witnesses": {...}}.
        #[arg(long)]
        choice: PathBuf,
    },
    /// Re-check the proof on relaxed models.
    Verify {
        #[command(flatten)]
        common: Common,
        /// A single choice to verify; otherwise random choices are sampled.
        #[arg(long)]
        choice: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Report atom usage and verify cut diagnostics.
    Diagnose {
        #[command(flatten)]
        common: Common,
        /// Most choices tried per cut site.
        #[arg(long, default_value_t = 64)]
        cap: usize,
    },
    /// Print the labeled model, or the annotated proof when a script is given.
    Print {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        proof: Option<PathBuf>,
        #[command(flatten)]
        engine: Engine,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    proof: PathBuf,
    /// Output file (JSON reports, model text for apply).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include the usage report in check output.
    #[arg(long)]
    diagnostics: bool,
    #[command(flatten)]
    engine: Engine,
}

#[derive(Args)]
struct Engine {
    /// Input label set (JSON).
    #[arg(long)]
    chi: Option<PathBuf>,
    #[arg(long, default_value = "parallel")]
    mode: String,
    /// linear | sampling | chain | fixture:<file>
    #[arg(long, default_value = "chain")]
    oracle: String,
    /// Weakening candidates (JSON); strict comparisons are always weakened.
    #[arg(long)]
    provider: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

struct Fail {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Fail {
    Fail { code, msg: msg.into() }
}

type Res<T> = Result<T, Fail>;

fn search_dir() -> Option<PathBuf> {
    std::env::var_os(FIXTURE_DIR_VAR).map(PathBuf::from)
}

fn locate(p: &Path) -> PathBuf {
    if !p.exists() && p.is_relative() {
        if let Some(d) = search_dir() {
            return d.join(p);
        }
    }
    p.to_path_buf()
}

fn read(p: &Path) -> Res<String> {
    let p = locate(p);
    std::fs::read_to_string(&p).map_err(|e| fail(1, format!("{}: {e}", p.display())))
}

fn read_json(p: &Path) -> Res<Value> {
    serde_json::from_str(&read(p)?).map_err(|e| fail(3, format!("{}: {e}", p.display())))
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Res<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| fail(1, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Setup {
    model: Fml,
    script: Option<ProofNode>,
    chi: TrackedLabelSet,
    mode: Mode,
    oracle: Box<dyn Oracle>,
    provider: DefaultProvider,
}

impl Setup {
    fn load(model: &Path, proof: Option<&Path>, e: &Engine) -> Res<Setup> {
        if let Some(n) = e.jobs {
            // only the first call per process can succeed, which is fine here
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
        let model = parse_model(&read(model)?).map_err(|x| fail(3, format!("model: {x}")))?.0;
        let script = match proof {
            Some(p) => Some(parse_script_str(&read(p)?).map_err(|x| fail(3, x))?),
            None => None,
        };
        let chi = match &e.chi {
            Some(p) => TrackedLabelSet::from_json(&read_json(p)?).map_err(|x| fail(3, format!("chi: {x}")))?,
            None => TrackedLabelSet::new(),
        };
        let mode = Mode::parse(&e.mode).ok_or_else(|| fail(1, format!("unknown mode '{}'", e.mode)))?;
        let oracle = oracle_from_spec(&e.oracle, search_dir().as_deref()).map_err(|x| {
            let code = if x.starts_with("fixture") { 3 } else { 1 };
            fail(code, x)
        })?;
        let provider = match &e.provider {
            Some(p) => DefaultProvider::from_json(&read_json(p)?).map_err(|x| fail(3, format!("provider: {x}")))?,
            None => DefaultProvider::new(),
        };
        Ok(Setup {
            model,
            script,
            chi,
            mode,
            oracle,
            provider,
        })
    }

    fn from_common(c: &Common) -> Res<Setup> {
        Setup::load(&c.model, Some(&c.proof), &c.engine)
    }

    fn script(&self) -> &ProofNode {
        self.script.as_ref().expect("a proof script was loaded")
    }

    fn check(&self) -> Res<AnnotatedProof> {
        Checker::new(self.oracle.as_ref(), &self.provider, self.mode)
            .check(&self.model, self.script(), &self.chi)
            .map_err(|e| {
                let at: Vec<String> = e.path.iter().map(usize::to_string).collect();
                fail(
                    2,
                    format!("proof failed at node [{}]: {}: {}\n  goal: {}", at.join("."), e.rule, e.message, e.goal),
                )
            })
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn cmd_check(c: &Common) -> Res<()> {
    let s = Setup::from_common(c)?;
    let p = s.check()?;
    let mut report = json!({"status": "closed", "mode": s.mode.as_str(), "sigma": p.sigma().to_json()});
    if c.diagnostics {
        report["usage"] = build_report(&p).to_json();
    }
    write_out(&c.out, &pretty(&report))?;
    if c.out.is_some() {
        println!("closed; {} labels in the root set", p.sigma().len());
    }
    Ok(())
}

fn load_choice(p: &Path) -> Res<MutationChoice> {
    MutationChoice::from_json(&read_json(p)?).map_err(|e| fail(3, format!("choice: {e}")))
}

fn cmd_apply(c: &Common, choice: &Path) -> Res<()> {
    let s = Setup::from_common(c)?;
    let p = s.check()?;
    let ch = load_choice(choice)?;
    admissible(&p, &ch).map_err(|m| fail(4, format!("choice outside the root set: {m}")))?;
    let relaxed = apply(&ch, &s.model, &s.provider).map_err(|e| fail(1, e.to_string()))?;
    let mut notes = Vec::new();
    for (l, k) in ch.active() {
        if k == MutationKind::W {
            let w = ch.witnesses.get(&l).map(print_atom).unwrap_or_else(|| "first provider candidate".into());
            notes.push(format!("{l}: W via {w}"));
        }
    }
    write_out(&c.out, &(print_model(&relaxed) + "\n"))?;
    for n in notes {
        if c.out.is_some() {
            println!("{n}");
        } else {
            eprintln!("{n}");
        }
    }
    Ok(())
}

fn cmd_verify(c: &Common, choice: &Option<PathBuf>, samples: usize) -> Res<()> {
    let s = Setup::from_common(c)?;
    let p = s.check()?;
    let choices = match choice {
        Some(f) => vec![load_choice(f)?],
        None => capped_choices(p.sigma(), samples, 1),
    };
    let mut results = Vec::new();
    for ch in &choices {
        match verify_relaxation(&p, s.script(), ch, s.oracle.as_ref(), &s.provider) {
            Ok(_) => results.push(json!({"choice": ch.to_json()["choice"], "verified": true})),
            Err(ReplayError::NotAdmitted(m)) => return Err(fail(4, format!("choice outside the root set: {m}"))),
            Err(e) => return Err(fail(2, format!("relaxation {} does not preserve the proof: {e}", ch.to_json()["choice"]))),
        }
    }
    write_out(&c.out, &pretty(&json!({"verified": results.len(), "results": results})))?;
    if c.out.is_some() {
        println!("{} choice(s) verified", results.len());
    }
    Ok(())
}

fn cmd_diagnose(c: &Common, cap: usize) -> Res<()> {
    let s = Setup::from_common(c)?;
    let p = s.check()?;
    let r = diagnostics::diagnose(&p, s.script(), s.oracle.as_ref(), &s.provider, cap);
    print!("{}", r.to_text());
    if let Some(out) = &c.out {
        write_out(&Some(out.clone()), &pretty(&r.to_json()))?;
    }
    let failed = r.cuts.iter().any(|c| matches!(c.verdict, diagnostics::CutVerdict::Failed(_)));
    if failed {
        return Err(fail(2, "a cut diagnostic did not verify"));
    }
    Ok(())
}

fn cmd_print(model: &Path, proof: &Option<PathBuf>, e: &Engine) -> Res<()> {
    let s = Setup::load(model, proof.as_deref(), e)?;
    if s.script.is_none() {
        println!("{}", print_model(&s.model));
        return Ok(());
    }
    let p = s.check()?;
    p.root.walk(&mut |n| {
        let at: Vec<String> = n.path.iter().map(usize::to_string).collect();
        let indent = "  ".repeat(n.path.len());
        println!("{indent}[{}] {}: {}", at.join("."), n.rule, print_sequent_labeled(&n.goal));
    });
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Cmd::Check(c) => cmd_check(c),
        Cmd::Apply { common, choice } => cmd_apply(common, choice),
        Cmd::Verify { common, choice, samples } => cmd_verify(common, choice, *samples),
        Cmd::Diagnose { common, cap } => cmd_diagnose(common, *cap),
        Cmd::Print { model, proof, engine } => cmd_print(model, proof, engine),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("uadl: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
