use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use balance_core::solvers::{autoscale_schedule, enumerate_exact, mckp_oracle, simulated_anneal};
use balance_core::{
    build_model, classify, config_echo, decode, default_cap_sweep, default_tune_grid,
    energy_landscape, ladder_compare, load_table, probability_sweep, reference_instance, tune_dpa,
    write_json, Assignment, DataBudget, Error, MethodEcho, PenaltyConfig, PenaltyMethod, Result,
    SegmentTable, SolutionClass, TableFormat, TuneGrid,
};

use crate::{
    Builtin, ExportArgs, FormatArg, InputOpts, LadderArgs, LandscapeArgs, MethodArg, SolveArgs,
    SolverArg, SweepArgs, SweepMethodArg, TuneArgs,
};

fn load_input(input: &InputOpts) -> Result<SegmentTable> {
    if let Some(path) = &input.input {
        load_table(path, TableFormat::from_path(path))
    } else {
        match input.builtin {
            Some(Builtin::Reference) => Ok(reference_instance()),
            None => unreachable!("clap enforces exactly one input source"),
        }
    }
}

fn method_of(arg: MethodArg) -> PenaltyMethod {
    match arg {
        MethodArg::Slack => PenaltyMethod::Slack,
        MethodArg::Dpa => PenaltyMethod::Dpa,
    }
}

/// Writes via a temporary file in the target directory so readers never see
/// a half-written report.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Report to `--out` (announcing it on stdout) or to stdout directly.
fn write_output(out: Option<&Path>, bytes: &[u8], summary: String) -> Result<()> {
    match out {
        None => {
            io::stdout().write_all(bytes)?;
            Ok(())
        }
        Some(path) => {
            atomic_write(path, bytes)?;
            println!("{summary} Wrote {}.", path.display());
            Ok(())
        }
    }
}

fn render<T: Serialize>(
    value: &T,
    format: FormatArg,
    csv: impl FnOnce(&T, &mut Vec<u8>) -> Result<()>,
) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        FormatArg::Json => write_json(&mut buf, value)?,
        FormatArg::Csv => csv(value, &mut buf)?,
    }
    Ok(buf)
}

#[derive(Serialize)]
struct SamplerEcho {
    shots: usize,
    sweeps: usize,
    seed: u64,
    distinct_states: usize,
}

#[derive(Serialize)]
struct SolveReport {
    d_max_mb: f64,
    unit_mb: f64,
    method: MethodEcho,
    solver: &'static str,
    num_vars: usize,
    energy: f64,
    assignment: Assignment,
    /// Chosen quality labels, segment order, when the assignment is one-hot.
    choice_labels: Option<Vec<String>>,
    class: SolutionClass,
    oracle_choices: Vec<String>,
    oracle_vmaf: f64,
    oracle_data_mb: f64,
    sampler: Option<SamplerEcho>,
}

pub fn solve(args: &SolveArgs) -> Result<()> {
    let table = load_input(&args.input)?;
    let budget = DataBudget::new(args.budget.dmax, args.budget.unit)?;
    let config = args.penalty.config(method_of(args.method));
    let method = config_echo(&table, &budget, &config)?;
    let oracle = mckp_oracle(&table, &budget)?;
    let model = build_model(&table, &budget, &config)?;
    let (bits, energy, sampler) = match args.solver {
        SolverArg::Exact => {
            let sol = enumerate_exact(&model)?;
            (sol.bits, sol.energy, None)
        }
        SolverArg::Anneal => {
            let schedule = autoscale_schedule(&model)?.with_sweeps(args.sweeps);
            let samples = simulated_anneal(&model, args.shots, &schedule, args.seed)?;
            let best = samples.best().expect("shots >= 1 yields a record").clone();
            let echo = SamplerEcho {
                shots: args.shots,
                sweeps: args.sweeps,
                seed: args.seed,
                distinct_states: samples.records.len(),
            };
            (best.bits, best.energy, Some(echo))
        }
    };
    let assignment = decode(&model, &bits, &table, &budget)?;
    let class = classify(&assignment, oracle.total_vmaf);
    let choice_labels = assignment.levels().map(|levels| {
        levels
            .iter()
            .enumerate()
            .map(|(segment, &level)| table.variant(segment, level).label.clone())
            .collect::<Vec<String>>()
    });
    let report = SolveReport {
        d_max_mb: budget.d_max_mb,
        unit_mb: budget.unit_mb,
        method,
        solver: match args.solver {
            SolverArg::Exact => "exact",
            SolverArg::Anneal => "anneal",
        },
        num_vars: model.num_vars(),
        energy,
        choice_labels,
        class,
        oracle_choices: oracle
            .choices
            .iter()
            .enumerate()
            .map(|(segment, &level)| table.variant(segment, level).label.clone())
            .collect(),
        oracle_vmaf: oracle.total_vmaf,
        oracle_data_mb: oracle.total_data_mb,
        assignment,
        sampler,
    };
    let mut buf = Vec::new();
    write_json(&mut buf, &report)?;
    let summary = format!(
        "Solved at cap {} MB: VMAF {} using {} MB ({:?}).",
        report.d_max_mb, report.assignment.total_vmaf, report.assignment.total_data_mb, class
    );
    write_output(args.out.as_deref(), &buf, summary)
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let table = load_input(&args.input)?;
    let caps = match &args.caps {
        Some(c) => c.clone(),
        None => default_cap_sweep(&table),
    };
    let configs: Vec<PenaltyConfig> = match args.method {
        SweepMethodArg::Slack => vec![args.penalty.config(PenaltyMethod::Slack)],
        SweepMethodArg::Dpa => vec![args.penalty.config(PenaltyMethod::Dpa)],
        SweepMethodArg::Both => vec![
            args.penalty.config(PenaltyMethod::Slack),
            args.penalty.config(PenaltyMethod::Dpa),
        ],
    };
    for config in &configs {
        config.validate()?;
    }
    let report = probability_sweep(&table, &caps, args.unit, &configs, &args.sampler.params())?;
    let bytes = render(&report, args.output.format, |r, w| r.write_csv(w))?;
    let summary = format!(
        "Probability sweep over {} caps x {} encoding(s), {} shots x {} trials, seed {}.",
        caps.len(),
        configs.len(),
        args.sampler.shots,
        args.sampler.trials,
        args.sampler.seed
    );
    write_output(args.output.out.as_deref(), &bytes, summary)
}

pub fn landscape(args: &LandscapeArgs) -> Result<()> {
    let table = load_input(&args.input)?;
    let budget = DataBudget::new(args.budget.dmax, args.budget.unit)?;
    let config = args.penalty.config(method_of(args.method));
    config.validate()?;
    let grid = energy_landscape(&table, &budget, &config)?;
    let bytes = render(&grid, args.output.format, |g, w| g.write_csv(w))?;
    let summary = format!(
        "Energy landscape ({} x {} levels, {} encoding) at cap {} MB; minimum at ({}, {}).",
        grid.row_labels.len(),
        grid.col_labels.len(),
        grid.method,
        grid.d_max_mb,
        grid.row_labels[grid.min_row],
        grid.col_labels[grid.min_col]
    );
    write_output(args.output.out.as_deref(), &bytes, summary)
}

pub fn ladder(args: &LadderArgs) -> Result<()> {
    let table = load_input(&args.input)?;
    let caps = match &args.caps {
        Some(c) => c.clone(),
        None => default_cap_sweep(&table),
    };
    let report = ladder_compare(&table, &caps, args.unit)?;
    let bytes = render(&report, args.output.format, |r, w| r.write_csv(w))?;
    let best_gain = report
        .rows
        .iter()
        .filter_map(|r| r.vmaf_gain)
        .fold(f64::NEG_INFINITY, f64::max);
    let summary = if best_gain.is_finite() {
        format!(
            "Ladder comparison over {} caps; best adaptive gain {} VMAF.",
            report.rows.len(),
            best_gain
        )
    } else {
        format!("Ladder comparison over {} caps; no cap fits a fixed ladder.", report.rows.len())
    };
    write_output(args.output.out.as_deref(), &bytes, summary)
}

pub fn tune(args: &TuneArgs) -> Result<()> {
    let table = load_input(&args.input)?;
    let budget = DataBudget::new(args.budget.dmax, args.budget.unit)?;
    let grid: TuneGrid = match &args.grid_file {
        Some(path) => serde_json::from_reader(File::open(path)?)?,
        None => default_tune_grid(),
    };
    let report = tune_dpa(&table, &budget, &grid, &args.sampler.params())?;
    let bytes = render(&report, args.output.format, |r, w| r.write_csv(w))?;
    let best = report.selected_row();
    let summary = format!(
        "Tuned {} triples at cap {} MB; selected mu1={} mu2={} mu3={} \
         (p_optimal {}, p_valid {}).",
        report.rows.len(),
        report.d_max_mb,
        best.mu1,
        best.mu2,
        best.mu3,
        best.p_optimal_mean,
        best.p_valid_mean
    );
    write_output(args.output.out.as_deref(), &bytes, summary)
}

pub fn export_qubo(args: &ExportArgs) -> Result<()> {
    let table = load_input(&args.input)?;
    let budget = DataBudget::new(args.budget.dmax, args.budget.unit)?;
    let config = args.penalty.config(method_of(args.method));
    config.validate()?;
    let model = build_model(&table, &budget, &config)?;
    let export = model.export();
    let mut buf = Vec::new();
    write_json(&mut buf, &export)?;
    let summary = format!(
        "Exported {} model: {} variables, {} quadratic terms.",
        config.method,
        model.num_vars(),
        model.quadratic().len()
    );
    write_output(args.out.as_deref(), &buf, summary)
}
