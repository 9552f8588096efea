//! One function per subcommand. Each returns a table for the CSV and a
//! JSON value for the sidecar and stdout.

use serde::Serialize;
use serde_json::{json, Value};

use dicke_grover::channels::{herald_metrics, mismatch_fidelity_exact_overlap, x_flip_all, PhysicalDickeRun};
use dicke_grover::experiments::{
    carving_baseline, fit_scaling, optimize_detuning, optimize_steps, sweep_m, sweep_n, sweep_phi, SweepResult,
};
use dicke_grover::grover::{
    build_cat_grover, build_ghz_grover, exact_preparation_exists, plan_dicke_exact, plan_dicke_exact_with_steps,
    plan_dicke_scalable, solve_rotation_angle, ProtocolPlan, TargetState,
};

use crate::config::{Command, RunConfig, StateKind, SweepAxis};
use crate::error::CliError;
use crate::output::{Cell, Table};

/// Step counts covered by the mismatch closed forms and existence report.
const MAX_REPORTED_STEPS: usize = 4;

pub struct Report {
    pub table: Table,
    pub results: Value,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results are plain data")
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    match cfg.command {
        Command::Plan => plan(cfg),
        Command::Simulate => simulate(cfg),
        Command::Sweep => sweep(cfg),
        Command::FitScaling => scaling(cfg),
        Command::Baseline => baseline(cfg),
    }
}

fn build_plan(cfg: &RunConfig) -> Result<ProtocolPlan, CliError> {
    Ok(match cfg.state {
        StateKind::Dicke => match (cfg.steps, cfg.modified_phase) {
            (Some(k), _) => plan_dicke_exact_with_steps(cfg.n, cfg.m, k)?,
            (None, true) => plan_dicke_scalable(cfg.n, cfg.m, true)?,
            (None, false) => plan_dicke_exact(cfg.n, cfg.m)?,
        },
        StateKind::Ghz => build_ghz_grover(cfg.n, cfg.ghz_variant, cfg.modified_phase)?.0,
        StateKind::Cat => build_cat_grover(cfg.n, cfg.phi_cat, cfg.parity, cfg.modified_phase)?.0,
    })
}

fn plan(cfg: &RunConfig) -> Result<Report, CliError> {
    let plan = build_plan(cfg)?;
    let mut table = Table::new(vec![
        "stage", "n", "seed_m", "steps", "phi", "alpha", "overlap", "predicted_fidelity", "simulated_fidelity", "exact",
    ]);
    // seed stages first, innermost first
    let mut stages = vec![&plan];
    while let Some(seed) = stages.last().and_then(|p| p.seed_plan.as_deref()) {
        stages.push(seed);
    }
    stages.reverse();
    let mut simulated = Vec::new();
    for (i, p) in stages.iter().enumerate() {
        let f = p.simulate()?;
        simulated.push(f);
        table.push(vec![
            i.into(),
            p.n_qubits.into(),
            p.seed_m.map_or(Cell::Empty, Cell::from),
            p.steps.into(),
            p.rotation_angle.into(),
            p.alpha.into(),
            p.overlap.into(),
            p.predicted_fidelity.into(),
            f.into(),
            p.exact.into(),
        ]);
    }
    let existence = match plan.target {
        TargetState::Dicke { m } => (1..=MAX_REPORTED_STEPS)
            .map(|k| exact_preparation_exists(plan.n_qubits, m, k).map(|ok| json!({"steps": k, "exact_solution": ok})))
            .collect::<Result<Vec<_>, _>>()?,
        _ => Vec::new(),
    };
    let results = json!({
        "plan": to_value(&plan),
        "simulated_fidelity": simulated,
        "photon_count": plan.photon_count(),
        "existence": existence,
    });
    Ok(Report { table, results })
}

fn dicke_only(cfg: &RunConfig, what: &str) -> Result<(), CliError> {
    if cfg.state != StateKind::Dicke {
        return Err(CliError::Config(format!("{what} supports Dicke targets only")));
    }
    Ok(())
}

fn simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    dicke_only(cfg, "simulate")?;
    let (n, m) = (cfg.n, cfg.m);
    let template = cfg.template()?;
    let m_run = m.min(n.saturating_sub(m));
    let fixed_d = cfg.resolution()?;
    let resolution = || -> Result<f64, CliError> {
        match fixed_d {
            Some(d) => Ok(d),
            None => Ok(optimize_detuning(n, m_run, &template, cfg.mode)?.resolution),
        }
    };
    let run_at = |k: usize, phi: f64, d: f64| -> Result<PhysicalDickeRun, CliError> {
        Ok(PhysicalDickeRun::new(n, m, phi, k, template.width, &template.at(d)?, cfg.mode)?.with_mismatch(cfg.zeta)?)
    };
    let (k, phi, d) = match (cfg.steps, cfg.phi) {
        (Some(k), Some(phi)) => (k, phi, resolution()?),
        (Some(k), None) => {
            let d = resolution()?;
            let mut best: Option<(f64, f64)> = None;
            for phi in solve_rotation_angle(n, m, k)? {
                let f = run_at(k, phi, d)?.metrics()?.fidelity;
                if best.map_or(true, |b| f > b.1) {
                    best = Some((phi, f));
                }
            }
            (k, best.expect("solver returns at least one root").0, d)
        }
        (None, _) => {
            let o = optimize_steps(n, m, &template, fixed_d, cfg.mode, false)?;
            (o.steps, o.phi, o.resolution)
        }
    };
    let run = run_at(k, phi, d)?;
    let mirrored = 2 * m > n;
    let mut table = Table::new(vec!["step", "trace", "fidelity", "target_population"]);
    let mut rho = run.initial().clone();
    let mut last = None;
    for step in 0..=k {
        if step > 0 {
            rho = run.step().apply(&rho)?;
        }
        let out = if mirrored { x_flip_all(&rho) } else { rho.clone() };
        let h = herald_metrics(&out, run.target())?;
        table.push(vec![
            step.into(),
            h.success_probability.into(),
            h.fidelity.into(),
            out.fidelity_with(run.target())?.into(),
        ]);
        last = Some(h);
    }
    let h = last.expect("at least the initial row");
    let results = json!({
        "steps": k,
        "phi": phi,
        "resolution": d,
        "mirrored": mirrored,
        "fidelity": h.fidelity,
        "success_probability": h.success_probability,
    });
    Ok(Report { table, results })
}

fn sweep_table(s: &SweepResult, axis: &'static str) -> Table {
    let mut t = Table::new(vec![axis, "fidelity", "success_probability", "steps", "resolution", "phi"]);
    for p in &s.points {
        t.push(vec![
            p.x.into(),
            p.fidelity.into(),
            p.success_probability.into(),
            p.steps.map_or(Cell::Empty, Cell::from),
            p.resolution.into(),
            p.phi.into(),
        ]);
    }
    t
}

fn sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let template = cfg.template()?;
    if cfg.axis != SweepAxis::Phi && cfg.grid.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    let s = match cfg.axis {
        SweepAxis::Phi => {
            dicke_only(cfg, "sweep")?;
            sweep_phi(cfg.n, cfg.m, &template, cfg.mode, cfg.points)?
        }
        SweepAxis::M => {
            dicke_only(cfg, "sweep")?;
            sweep_m(cfg.n, &cfg.integer_grid()?, &template, cfg.mode, cfg.quantity)?
        }
        SweepAxis::N => {
            dicke_only(cfg, "sweep")?;
            sweep_n(&cfg.integer_grid()?, cfg.m, &template, cfg.mode, cfg.quantity)?
        }
        SweepAxis::Zeta => return zeta_sweep(cfg),
    };
    let axis = match cfg.axis {
        SweepAxis::Phi => "phi",
        SweepAxis::M => "m",
        _ => "n",
    };
    Ok(Report { table: sweep_table(&s, axis), results: to_value(&s) })
}

fn zeta_sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    if let Some(z) = cfg.grid.iter().find(|z| !(0.0..=1.0).contains(*z)) {
        return Err(CliError::Config(format!("zeta {z} outside [0, 1]")));
    }
    let mut table = Table::new(vec!["zeta", "fidelity_k1", "fidelity_k2", "fidelity_k3", "fidelity_k4"]);
    for &z in &cfg.grid {
        let mut row = vec![Cell::from(z)];
        for k in 1..=MAX_REPORTED_STEPS {
            row.push(mismatch_fidelity_exact_overlap(k, z)?.into());
        }
        table.push(row);
    }
    Ok(Report { table, results: json!({"axis": "zeta", "points": cfg.grid.len()}) })
}

fn scaling(cfg: &RunConfig) -> Result<Report, CliError> {
    if cfg.grid.is_empty() {
        return Err(CliError::Config("cooperativity grid is empty".into()));
    }
    let fit = fit_scaling(cfg.n, cfg.m, cfg.mode, &cfg.grid, &cfg.template()?, cfg.trim)?;
    let mut table = Table::new(vec!["cooperativity", "resolution", "infidelity"]);
    for i in 0..fit.cooperativities.len() {
        table.push(vec![fit.cooperativities[i].into(), fit.resolutions[i].into(), fit.infidelities[i].into()]);
    }
    Ok(Report { table, results: to_value(&fit) })
}

/// Carving against deterministic Grover preparation for each `m` in the grid.
fn baseline(cfg: &RunConfig) -> Result<Report, CliError> {
    dicke_only(cfg, "baseline")?;
    if cfg.grid.is_empty() {
        return Err(CliError::Config("excitation grid is empty".into()));
    }
    let d = cfg
        .resolution()?
        .ok_or_else(|| CliError::Config("baseline needs a resolution for the carving cavity".into()))?;
    let template = cfg.template()?;
    let params = template.at(d)?;
    let mut table = Table::new(vec![
        "m",
        "carving_success",
        "carving_infidelity",
        "grover_steps",
        "grover_fidelity",
        "grover_success",
        "grover_resolution",
    ]);
    let mut rows = Vec::new();
    for m in cfg.integer_grid()? {
        let c = carving_baseline(cfg.n, m, &params, None)?;
        let g = optimize_steps(cfg.n, m, &template, None, cfg.mode, false)?;
        table.push(vec![
            m.into(),
            c.success_probability.into(),
            c.infidelity.into(),
            g.steps.into(),
            g.fidelity.into(),
            g.success_probability.into(),
            g.resolution.into(),
        ]);
        rows.push(json!({
            "m": m,
            "carving": {"success_probability": c.success_probability, "infidelity": c.infidelity},
            "grover": to_value(&g),
        }));
    }
    Ok(Report { table, results: json!({"carving_resolution": d, "rows": rows}) })
}
