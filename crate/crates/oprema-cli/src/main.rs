//! Command-line front end: assemble, disassemble, run, twin-run with fault
//! injection, and the verification suites.
//!
//! Exit codes: 0 success, 1 user or content error, 2 run limit reached,
//! 3 twin session halted on an unresolved mismatch.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oprema::asm;
use oprema::control::{self, format_ms, RunLimits, RunOutcome};
use oprema::image::PlugboardImage;
use oprema::machine::{operand_name, operand_source, MachineState, Mode, OperandSource};
use oprema::numeric::{decode_row, format_number, parse_decimal};
use oprema::oracle;
use oprema::twin::{
    run_twin, FaultLocation, FaultSpec, MismatchPolicy, Persistence, TwinOutcome, TwinSession,
    Which,
};
use oprema::verify::{self, SweepConfig};

#[derive(Parser)]
#[command(
    name = "oprema",
    version,
    about = "Emulator for the Oprema relay computer (Carl Zeiss Jena, 1955)"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Assemble a source program into a plugboard image
    Asm {
        /// Source file (.oprema)
        src: PathBuf,
        /// Output image file (.opimg)
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Disassemble a plugboard image back to source text
    Dis {
        image: PathBuf,
        /// Output file; stdout when omitted
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a plugboard image and print the program's output
    Run {
        image: PathBuf,
        #[command(flatten)]
        config: RunFlags,
        /// Write the instruction trace to a file
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        /// Print a timing summary (total pulses and milliseconds)
        #[arg(long)]
        timing: bool,
        /// Drop into the interactive debugger prompt
        #[arg(long)]
        interactive: bool,
    },
    /// Run two machines in lockstep and compare after every instruction
    Twin {
        image: PathBuf,
        #[command(flatten)]
        config: RunFlags,
        /// Inject a fault: A|B:step:location:transient|stuck where the
        /// location is R<reg>.<bit>, P<row>.<bit> or Y<unit>.<row>.<bit>
        #[arg(long, value_name = "SPEC")]
        inject: Vec<String>,
        /// Mismatch policy: repeat[:retries], insert:R<k>=<value>, or halt
        #[arg(long, default_value = "halt")]
        policy: String,
    },
    /// Run the arithmetic verification suites against the exact oracle
    Verify {
        /// Random trials per sweep
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Run the sweeps on one thread
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Args)]
struct RunFlags {
    /// Initial cyclic-memory positions, overriding the image
    #[arg(long, value_name = "a,b,c,d")]
    start_positions: Option<String>,
    /// Initial program row, overriding the image
    #[arg(long)]
    start_pc: Option<u16>,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    #[arg(long)]
    max_pulses: Option<u64>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Asm { src, out } => cmd_asm(&src, &out),
        Cmd::Dis { image, out } => cmd_dis(&image, out.as_deref()),
        Cmd::Run {
            image,
            config,
            trace,
            timing,
            interactive,
        } => cmd_run(&image, &config, trace.as_deref(), timing, interactive),
        Cmd::Twin {
            image,
            config,
            inject,
            policy,
        } => cmd_twin(&image, &config, &inject, &policy),
        Cmd::Verify {
            trials,
            seed,
            sequential,
        } => Ok(cmd_verify(trials, seed, sequential)),
    }
}

fn cmd_asm(src: &std::path::Path, out: &std::path::Path) -> Result<ExitCode, String> {
    let text = fs::read_to_string(src).map_err(|e| format!("{}: {e}", src.display()))?;
    let image = match asm::assemble(&text) {
        Ok(image) => image,
        Err(e) => {
            eprintln!("{}: {e}", src.display());
            return Ok(ExitCode::from(1));
        }
    };
    let usage = asm::usage(&image);
    if usage.instructions == 0 {
        eprintln!("warning: empty program (no instruction rows)");
    }
    fs::write(out, image.save()).map_err(|e| format!("{}: {e}", out.display()))?;
    println!(
        "{}/300 instructions, {}/28 constants, {}/80 {}/80 {}/80 {}/80 cyclic rows",
        usage.instructions,
        usage.constants,
        usage.cyclic[0],
        usage.cyclic[1],
        usage.cyclic[2],
        usage.cyclic[3]
    );
    Ok(ExitCode::SUCCESS)
}

fn load_image(path: &std::path::Path) -> Result<PlugboardImage, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    PlugboardImage::load(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_dis(path: &std::path::Path, out: Option<&std::path::Path>) -> Result<ExitCode, String> {
    let image = load_image(path)?;
    let text = asm::disassemble(&image).map_err(|e| e.to_string())?;
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn apply_run_flags(image: &mut PlugboardImage, flags: &RunFlags) -> Result<RunLimits, String> {
    if let Some(positions) = &flags.start_positions {
        let parts: Vec<&str> = positions.split(',').collect();
        if parts.len() != 4 {
            return Err("start positions need four comma-separated values".into());
        }
        let mut out = [0u16; 4];
        for (slot, p) in out.iter_mut().zip(&parts) {
            *slot = p.trim().parse().map_err(|_| "bad start position")?;
        }
        for (unit, &p) in out.iter().enumerate() {
            let len = image.cyclic(unit as u8).len();
            if p as usize >= len.max(1) {
                return Err(format!(
                    "start position {p} outside cyclic memory Y{unit} ({len} rows)"
                ));
            }
        }
        image.start.positions = out;
    }
    if let Some(pc) = flags.start_pc {
        if pc >= 300 {
            return Err("start pc outside 0..=299".into());
        }
        image.start.pc = pc;
    }
    Ok(RunLimits {
        max_steps: flags.max_steps,
        max_pulses: flags.max_pulses.unwrap_or(u64::MAX),
    })
}

fn cmd_run(
    path: &std::path::Path,
    flags: &RunFlags,
    trace: Option<&std::path::Path>,
    timing: bool,
    interactive: bool,
) -> Result<ExitCode, String> {
    let mut image = load_image(path)?;
    let limits = apply_run_flags(&mut image, flags)?;
    let mut state = MachineState::new(&image);

    if interactive {
        return interactive_loop(&mut state, &image);
    }

    let report = control::run(&mut state, &image, limits).map_err(|e| e.to_string())?;
    for line in &state.output {
        println!("{line}");
    }
    if let Some(p) = trace {
        let mut text = String::new();
        for record in &report.trace {
            text.push_str(&record.line());
            text.push('\n');
        }
        fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    if timing {
        eprintln!(
            "{} steps, {} pulses, {} ms",
            report.steps,
            report.total_pulses,
            format_ms(report.total_ms)
        );
    }
    match report.outcome {
        RunOutcome::Halted => Ok(ExitCode::SUCCESS),
        RunOutcome::StepLimit | RunOutcome::PulseLimit => {
            eprintln!("{}", report.outcome);
            Ok(ExitCode::from(2))
        }
    }
}

/// A small debugger prompt: step, regs, print <addr>, run, quit.
fn interactive_loop(state: &mut MachineState, image: &PlugboardImage) -> Result<ExitCode, String> {
    control::start(state);
    let stdin = io::stdin();
    let mut printed_lines = 0usize;
    loop {
        print!("pc={:>3}> ", state.pc);
        io::stdout().flush().ok();
        let mut line = String::new();
        if stdin
            .lock()
            .read_line(&mut line)
            .map_err(|e| e.to_string())?
            == 0
        {
            return Ok(ExitCode::SUCCESS);
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            [] => {}
            ["step"] | ["s"] => do_steps(state, image, 1, false, &mut printed_lines),
            ["step", n] | ["s", n] => {
                let n: u64 = n.parse().map_err(|_| "bad step count")?;
                do_steps(state, image, n, false, &mut printed_lines)
            }
            // run quietly to the next halt, with a guard against runaway
            // loops
            ["run"] => do_steps(state, image, 1_000_000, true, &mut printed_lines),
            ["regs"] | ["r"] => {
                for i in 0..32u8 {
                    let v = state.register(i);
                    if !v.is_zero() {
                        println!("R{i:<2} = {}", format_number(&v));
                    }
                }
                println!(
                    "pc = {}, cyclic positions = {:?}, pulses = {}",
                    state.pc, state.cyclic_pos, state.pulse_count
                );
            }
            ["print", addr] => match parse_operand_addr(addr) {
                Some(a) => println!("{} = {}", operand_name(a), peek(state, image, a)),
                None => println!("unknown address {addr}"),
            },
            ["start"] => control::start(state),
            ["quit"] | ["q"] => return Ok(ExitCode::SUCCESS),
            other => println!("unknown command {other:?} (step, run, regs, print, quit)"),
        }
    }
}

fn do_steps(
    state: &mut MachineState,
    image: &PlugboardImage,
    n: u64,
    quiet: bool,
    printed_lines: &mut usize,
) {
    for _ in 0..n {
        match control::step(state, image) {
            Ok(record) => {
                if !quiet {
                    println!("{}", record.line());
                }
                for out in &state.output[*printed_lines..] {
                    println!("  output: {out}");
                }
                *printed_lines = state.output.len();
                if state.mode == Mode::Idle {
                    println!("machine idle");
                    break;
                }
            }
            Err(e) => {
                println!("{e}");
                break;
            }
        }
    }
}

fn parse_operand_addr(text: &str) -> Option<u8> {
    if text.len() < 2 || !text.is_char_boundary(1) {
        return None;
    }
    let (prefix, rest) = text.split_at(1);
    let n: u8 = rest.parse().ok()?;
    match prefix {
        "C" | "c" if n < 28 => Some(n),
        "Y" | "y" if n < 4 => Some(28 + n),
        "R" | "r" if n < 32 => Some(32 + n),
        _ => None,
    }
}

/// Debugger peek without the machine's read side effects.
fn peek(state: &MachineState, image: &PlugboardImage, addr: u8) -> String {
    let row = match operand_source(addr) {
        OperandSource::Constant(i) => image.constant(i),
        OperandSource::Cyclic(unit) => {
            let table = image.cyclic(unit);
            if table.is_empty() {
                None
            } else {
                Some(table.row((state.cyclic_pos[unit as usize] % table.len()) as u16))
            }
        }
        OperandSource::Register(i) => Some(state.register_row(i)),
    };
    match row {
        Some(row) => match decode_row(row) {
            Ok(n) => format_number(&n),
            Err(e) => format!("<{e}>"),
        },
        None => "<unplugged>".to_string(),
    }
}

fn parse_fault(spec: &str) -> Result<FaultSpec, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [machine, step, location, persistence] = parts.as_slice() else {
        return Err(format!(
            "bad fault spec `{spec}` (want A|B:step:location:transient|stuck)"
        ));
    };
    let machine = match *machine {
        "A" | "a" => Which::A,
        "B" | "b" => Which::B,
        _ => return Err("fault machine must be A or B".into()),
    };
    let trigger_step: u64 = step.parse().map_err(|_| "bad fault trigger step")?;
    let persistence = match *persistence {
        "transient" => Persistence::Transient,
        "stuck" => Persistence::Stuck,
        _ => return Err("fault persistence must be transient or stuck".into()),
    };
    if location.len() < 2 {
        return Err(format!("bad fault location `{location}`"));
    }
    let nums: Vec<u32> = location[1..]
        .split('.')
        .map(|p| p.parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("bad fault location `{location}`"))?;
    let location = match (location.chars().next(), nums.as_slice()) {
        (Some('R' | 'r'), [reg, bit]) => FaultLocation::Register {
            reg: *reg as u8,
            bit: *bit as u8,
        },
        (Some('P' | 'p'), [row, bit]) => FaultLocation::ProgramRow {
            row: *row as u16,
            bit: *bit as u8,
        },
        (Some('Y' | 'y'), [unit, row, bit]) => FaultLocation::CyclicRow {
            unit: *unit as u8,
            row: *row as u16,
            bit: *bit as u8,
        },
        _ => return Err(format!("bad fault location `{location}`")),
    };
    Ok(FaultSpec {
        machine,
        trigger_step,
        location,
        persistence,
    })
}

fn parse_policy(text: &str) -> Result<MismatchPolicy, String> {
    if text == "halt" {
        return Ok(MismatchPolicy::Halt);
    }
    if text == "repeat" {
        return Ok(MismatchPolicy::RepeatInstruction { max_retries: 10 });
    }
    if let Some(n) = text.strip_prefix("repeat:") {
        return Ok(MismatchPolicy::RepeatInstruction {
            max_retries: n.parse().map_err(|_| "bad retry count")?,
        });
    }
    if let Some(rest) = text.strip_prefix("insert:") {
        let (reg, value) = rest
            .split_once('=')
            .ok_or("insert policy wants insert:R<k>=<value>")?;
        let reg = reg
            .trim()
            .strip_prefix(['R', 'r'])
            .and_then(|r| r.parse::<u8>().ok())
            .filter(|&r| r < 32)
            .ok_or("insert register must be R0..R31")?;
        let value = parse_decimal(value.trim()).map_err(|e| e.to_string())?;
        return Ok(MismatchPolicy::InsertValue {
            register: reg,
            value,
        });
    }
    Err(format!("unknown policy `{text}`"))
}

fn cmd_twin(
    path: &std::path::Path,
    flags: &RunFlags,
    inject: &[String],
    policy: &str,
) -> Result<ExitCode, String> {
    let mut image = load_image(path)?;
    let limits = apply_run_flags(&mut image, flags)?;
    let policy = parse_policy(policy)?;
    let mut session = TwinSession::new(&image);
    for spec in inject {
        let fault = parse_fault(spec)?;
        session.inject_fault(fault).map_err(|e| e.to_string())?;
    }
    let report = run_twin(&mut session, &policy, limits.max_steps).map_err(|e| e.to_string())?;
    for line in &report.output {
        println!("{line}");
    }
    for m in &report.mismatches {
        eprintln!(
            "mismatch at step {} pc {}: {} differs (A {} | B {}) -> {}",
            m.details.step,
            m.details.pc,
            m.details.observable,
            m.details.a_value,
            m.details.b_value,
            m.resolution
        );
    }
    match report.outcome {
        TwinOutcome::Completed => Ok(ExitCode::SUCCESS),
        TwinOutcome::HaltedOnMismatch => Ok(ExitCode::from(3)),
        TwinOutcome::StepLimit => {
            eprintln!("step limit reached");
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_verify(trials: usize, seed: Option<u64>, sequential: bool) -> ExitCode {
    let mut cfg = SweepConfig {
        n_random: trials,
        ..SweepConfig::default()
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if sequential {
        cfg.parallel = false;
    }

    // The error table of the two rounding rules over the hundred (d7, d8)
    // pairs.
    let table = oracle::enumerate_rounding_errors();
    println!("rounding errors over the 100 (d7,d8) pairs, in units of d8:");
    println!(
        "  normalization rounding: signed sum {}, mean |error| {}",
        table.sum_signed_norm(),
        table.total_abs_norm() as f64 / 100.0
    );
    println!(
        "  round-ties-away:        mean |error| {}",
        table.total_abs_rta() as f64 / 100.0
    );
    println!(
        "  ratio of mean absolute errors: {}",
        table.total_abs_norm() as f64 / table.total_abs_rta() as f64
    );
    println!();

    let mut all_pass = true;
    for outcome in verify::run_all(&cfg) {
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{status}  {:32} {}", outcome.name, outcome.detail);
        if let Some(ce) = &outcome.counterexample {
            println!("      counterexample: {ce}");
        }
        all_pass &= outcome.pass;
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
