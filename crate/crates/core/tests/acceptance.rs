//! Acceptance suite: one test per shipping criterion, each printing a
//! single `ACCEPTANCE <n> PASS/FLAG` line (visible with `--nocapture`).
//! Criterion 9 (byte-identical CLI reports) lives in the CLI crate's tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use balance_core::formulation::{slack_bit_count, SlackBits};
use balance_core::qubo::{bits_to_spins, QuboBuilder, Sense, VarRole};
use balance_core::solvers::{enumerate_exact, mckp_dp, mckp_product_search};
use balance_core::{
    build_model, decode, default_cap_sweep, default_tune_grid, ladder_compare, mckp_oracle,
    probability_sweep, reference_instance, synth_instance, tune_dpa, DataBudget, Error,
    PenaltyConfig, PenaltyMethod, SegmentTable, SweepParams, TuneGrid, VarRole as Role,
    DEFAULT_UNIT_MB,
};

const EPS: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn criterion_01_reference_table_values() {
    let t = reference_instance();
    let expected: [[(&str, f64, f64); 4]; 2] = [
        [
            ("1080p", 92.90, 8.17),
            ("720p", 90.58, 5.46),
            ("480p", 87.13, 2.68),
            ("360p", 84.65, 0.96),
        ],
        [
            ("1080p", 95.69, 12.09),
            ("720p", 94.96, 7.76),
            ("480p", 93.14, 4.06),
            ("360p", 89.03, 1.63),
        ],
    ];
    assert_eq!(t.num_segments(), 2);
    assert_eq!(t.num_levels(), 4);
    for (s, row) in expected.iter().enumerate() {
        for (l, &(label, vmaf, data)) in row.iter().enumerate() {
            let v = t.variant(s, l);
            assert_eq!(v.label, label);
            assert_eq!(v.vmaf, vmaf, "segment {s} level {l} vmaf");
            assert_eq!(v.data_mb, data, "segment {s} level {l} data");
        }
    }
    println!("ACCEPTANCE 1 PASS: built-in reference table matches all 16 (vmaf, data) pairs");
}

#[test]
fn criterion_02_oracle_routes_agree_on_random_instances() {
    let mut checked = 0usize;
    for seed in 0..200u64 {
        let n = 2 + (seed % 3) as usize;
        let m = 2 + ((seed / 3) % 3) as usize;
        let t = synth_instance(n, m, seed).unwrap();
        // Caps sit 0.001 MB above realized totals (far from any boundary at
        // the 0.01 MB quantization), plus one clearly infeasible and one
        // clearly unconstrained cap.
        let mut caps: Vec<f64> = vec![t.min_total_data() * 0.5, t.max_total_data() + 1.0];
        for level in 0..m {
            let total: f64 = (0..n).map(|s| t.variant(s, level).data_mb).sum();
            caps.push(total + 0.001);
        }
        let mixed: f64 =
            (0..n).map(|s| t.variant(s, (seed as usize + s) % m).data_mb).sum();
        caps.push(mixed + 0.001);
        for cap in caps {
            let budget = DataBudget::with_default_unit(cap).unwrap();
            let dp = mckp_dp(&t, &budget);
            let ps = mckp_product_search(&t, cap);
            match (&dp, &ps) {
                (Ok(a), Ok(b)) => {
                    assert!(
                        close(a.total_vmaf, b.total_vmaf),
                        "seed {seed} cap {cap}: DP {} vs product {}",
                        a.total_vmaf,
                        b.total_vmaf
                    );
                }
                (Err(Error::Infeasible { .. }), Err(Error::Infeasible { .. })) => {}
                other => panic!("seed {seed} cap {cap}: verdicts diverge: {other:?}"),
            }
            // The combined oracle must agree with itself (no mismatch error).
            match mckp_oracle(&t, &budget) {
                Ok(_) | Err(Error::Infeasible { .. }) => {}
                Err(e) => panic!("seed {seed} cap {cap}: oracle cross-check failed: {e}"),
            }
            checked += 1;
        }
    }
    println!(
        "ACCEPTANCE 2 PASS: DP and product-search optima agree on 200 random \
         instances ({checked} cap evaluations)"
    );
}

/// Recomputes the penalized objective from the table and config alone,
/// using the model only for its variable registry.
fn scalar_energy(
    table: &SegmentTable,
    budget: &DataBudget,
    config: &PenaltyConfig,
    roles: &[Role],
    bits: &[bool],
) -> f64 {
    let lambda0 = config.resolved_lambda0(table);
    let mut vmaf = 0.0;
    let mut data = 0.0;
    let mut counts = vec![0i64; table.num_segments()];
    let mut slack_value: i128 = 0;
    for (idx, role) in roles.iter().enumerate() {
        if !bits[idx] {
            continue;
        }
        match *role {
            Role::Decision { segment, level } => {
                let v = table.variant(segment, level);
                vmaf += v.vmaf;
                data += v.data_mb;
                counts[segment] += 1;
            }
            Role::Slack { bit } => slack_value += 1i128 << bit,
        }
    }
    let mut f = vmaf;
    for &c in &counts {
        f -= lambda0 * ((c - 1) as f64).powi(2);
    }
    match config.method {
        PenaltyMethod::Slack => {
            let lambda1 = config.resolved_lambda1(table);
            let used: i128 = roles
                .iter()
                .zip(bits)
                .filter_map(|(role, &on)| match *role {
                    Role::Decision { segment, level } if on => {
                        Some(budget.units(table.variant(segment, level).data_mb) as i128)
                    }
                    _ => None,
                })
                .sum();
            let residual = (budget.max_units().unwrap() as i128 - used - slack_value) as f64;
            f -= lambda1 * residual * residual;
        }
        PenaltyMethod::Dpa => {
            let threshold = budget.d_max_mb / config.mu3;
            let r = (data - threshold) / (budget.d_max_mb - threshold);
            f += config.mu1 * r - config.mu2 * r * r;
        }
    }
    -f
}

#[test]
fn criterion_03_model_energy_matches_scalar_objective() {
    let t = reference_instance();
    let budget = DataBudget::with_default_unit(10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    for config in [PenaltyConfig::slack(), PenaltyConfig::dpa()] {
        let model = build_model(&t, &budget, &config).unwrap();
        // The expanded quadratic form sums coefficients of order
        // lambda1 * units^2 (~1e8 for the slack register), so evaluating it
        // loses a few units in the eighth decimal to cancellation even though
        // the polynomial is algebraically identical to the scalar objective.
        // Scale the tolerance to the total coefficient magnitude; it stays
        // many orders of magnitude below the smallest structural coefficient.
        let magnitude: f64 = model.offset().abs()
            + model.linear().values().map(|c| c.abs()).sum::<f64>()
            + model.quadratic().values().map(|c| c.abs()).sum::<f64>();
        let tol = 1e-9 + 1e-12 * magnitude;
        for _ in 0..1000 {
            let bits: Vec<bool> = (0..model.num_vars()).map(|_| rng.gen()).collect();
            let e = model.energy(&bits).unwrap();
            let s = scalar_energy(&t, &budget, &config, model.roles(), &bits);
            assert!(
                (e - s).abs() <= tol,
                "{} model: energy {e} vs scalar {s} (tol {tol:.3e}) on {bits:?}",
                config.method
            );
        }
    }
    println!(
        "ACCEPTANCE 3 PASS: model energies match the scalar objective on \
         1000 random bitstrings per encoding"
    );
}

#[test]
fn criterion_04_exact_minimizer_matches_oracle() {
    let t = reference_instance();
    for cap in [5.0, 10.0, 15.0, 25.0] {
        let budget = DataBudget::with_default_unit(cap).unwrap();
        let model = build_model(&t, &budget, &PenaltyConfig::dpa()).unwrap();
        let ground = enumerate_exact(&model).unwrap();
        let assignment = decode(&model, &ground.bits, &t, &budget).unwrap();
        let oracle = mckp_oracle(&t, &budget).unwrap();
        assert!(assignment.valid, "cap {cap}: ground state decodes invalid");
        assert_eq!(
            assignment.levels().unwrap(),
            oracle.choices,
            "cap {cap}: ground state != oracle optimum"
        );
        if cap == 10.0 {
            assert_eq!(oracle.choices, vec![1, 2]);
            assert!(close(assignment.total_vmaf, 183.72));
        }
    }
    println!(
        "ACCEPTANCE 4 PASS: enumerated ground states decode to the oracle \
         optimum at caps 5/10/15/25 MB (cap 10: 720p+480p, VMAF 183.72)"
    );
}

#[test]
fn criterion_05_slack_register_soundness_and_completeness() {
    let t = reference_instance();
    let budget = DataBudget::with_default_unit(10.0).unwrap();
    let config = PenaltyConfig {
        slack_bits: SlackBits::Full,
        ..PenaltyConfig::slack()
    };
    let model = build_model(&t, &budget, &config).unwrap();
    let lambda1 = config.resolved_lambda1(&t);
    let k = slack_bit_count(budget.max_units().unwrap(), SlackBits::Full);
    assert_eq!(k, 10);
    let decision: Vec<Vec<usize>> = (0..2)
        .map(|segment| {
            (0..4)
                .map(|level| {
                    model
                        .roles()
                        .iter()
                        .position(|r| *r == Role::Decision { segment, level })
                        .unwrap()
                })
                .collect()
        })
        .collect();
    let slack_vars: Vec<usize> = (0..k)
        .map(|bit| model.roles().iter().position(|r| *r == Role::Slack { bit }).unwrap())
        .collect();
    let mut feasible_cells = 0usize;
    for i in 0..4 {
        for j in 0..4 {
            let a = t.variant(0, i);
            let b = t.variant(1, j);
            let feasible = a.data_mb + b.data_mb <= budget.d_max_mb;
            feasible_cells += feasible as usize;
            let vmaf = a.vmaf + b.vmaf;
            let mut min_penalty = f64::INFINITY;
            for s in 0u64..(1 << k) {
                let mut x = vec![false; model.num_vars()];
                x[decision[0][i]] = true;
                x[decision[1][j]] = true;
                for (bit, &var) in slack_vars.iter().enumerate() {
                    x[var] = (s >> bit) & 1 == 1;
                }
                // One-hot residual is zero here, so the slack penalty is the
                // whole gap between the energy and the plain -VMAF objective.
                let penalty = model.energy(&x).unwrap() + vmaf;
                min_penalty = min_penalty.min(penalty);
            }
            if feasible {
                assert!(
                    min_penalty.abs() <= 1e-6,
                    "({i},{j}) feasible but best slack penalty is {min_penalty}"
                );
            } else {
                assert!(
                    min_penalty >= lambda1 - 1e-4,
                    "({i},{j}) infeasible but best slack penalty is only {min_penalty}"
                );
            }
        }
    }
    println!(
        "ACCEPTANCE 5 PASS: full slack register zeroes the penalty for the \
         {feasible_cells} in-budget assignments and keeps it above lambda1 \
         for the other {}",
        16 - feasible_cells
    );
}

#[test]
fn criterion_06_qubo_ising_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    for case in 0..100 {
        let n = rng.gen_range(1..=12);
        let mut b = QuboBuilder::new(Sense::Minimize);
        for bit in 0..n {
            b.push_var(VarRole::Slack { bit });
        }
        b.add_offset(rng.gen_range(-10.0..10.0));
        for i in 0..n {
            if rng.gen_bool(0.7) {
                b.add_linear(i, rng.gen_range(-10.0..10.0)).unwrap();
            }
            for j in (i + 1)..n {
                if rng.gen_bool(0.5) {
                    b.add_quadratic(i, j, rng.gen_range(-10.0..10.0)).unwrap();
                }
            }
        }
        let model = b.finish();
        let ising = model.to_ising();
        for word in 0u64..(1 << n) {
            let bits: Vec<bool> = (0..n).map(|i| (word >> i) & 1 == 1).collect();
            let eq = model.energy(&bits).unwrap();
            let es = ising.energy(&bits_to_spins(&bits)).unwrap();
            assert!(
                (eq - es).abs() <= 1e-9,
                "case {case}, word {word:b}: qubo {eq} vs ising {es}"
            );
        }
    }
    println!(
        "ACCEPTANCE 6 PASS: binary and spin energies agree on every state of \
         100 random models up to 12 variables"
    );
}

#[test]
fn criterion_07_adaptive_selection_dominates_fixed_ladders() {
    let t = reference_instance();
    let mut caps = default_cap_sweep(&t);
    caps.extend([5.0, 10.0, 15.0, 25.0]);
    let cmp = ladder_compare(&t, &caps, DEFAULT_UNIT_MB).unwrap();
    let mut strict = false;
    for row in &cmp.rows {
        if let Some(gain) = row.vmaf_gain {
            assert!(gain >= -EPS, "cap {}: ladder beat adaptive by {}", row.d_max_mb, -gain);
            if gain > 1.0 {
                strict = true;
            }
        }
    }
    assert!(strict, "no cap showed a strict adaptive improvement");
    let at_ten = cmp.rows.iter().find(|r| r.d_max_mb == 10.0).unwrap();
    assert!(close(at_ten.balance_vmaf.unwrap(), 183.72));
    assert!((at_ten.ladder_vmaf.unwrap() - 180.27).abs() < 1e-9);
    let mut instance_count = 0;
    for seed in 0..50u64 {
        let n = 2 + (seed % 5) as usize;
        let t = synth_instance(n, 4, seed).unwrap();
        let caps = default_cap_sweep(&t);
        let cmp = ladder_compare(&t, &caps, DEFAULT_UNIT_MB).unwrap();
        for row in &cmp.rows {
            if let Some(gain) = row.vmaf_gain {
                assert!(
                    gain >= -EPS,
                    "synth seed {seed} cap {}: ladder beat adaptive",
                    row.d_max_mb
                );
            }
        }
        instance_count += 1;
    }
    println!(
        "ACCEPTANCE 7 PASS: adaptive VMAF >= fixed-ladder VMAF at every \
         ladder-feasible cap (reference + {instance_count} synthetic instances); \
         strict win at 10 MB (183.72 vs 180.27)"
    );
}

#[test]
fn criterion_08_rational_penalty_outperforms_slack_sampling() {
    let t = reference_instance();
    let caps = default_cap_sweep(&t);
    let configs = [PenaltyConfig::slack(), PenaltyConfig::dpa()];
    let params = SweepParams { shots: 1000, trials: 10, sweeps: 1000, seed: 7 };
    let report = probability_sweep(&t, &caps, DEFAULT_UNIT_MB, &configs, &params).unwrap();
    assert_eq!(report.rows.len(), caps.len() * 2);
    let mut last_oracle = f64::NEG_INFINITY;
    for pair in report.rows.chunks(2) {
        for row in pair {
            assert!((0.0..=1.0).contains(&row.p_valid_mean));
            assert!(row.p_optimal_mean <= row.p_valid_mean + 1e-12);
        }
        assert_eq!(pair[0].method, PenaltyMethod::Slack);
        assert_eq!(pair[1].method, PenaltyMethod::Dpa);
        assert!(pair[1].oracle_vmaf >= last_oracle - EPS, "oracle optimum decreased");
        last_oracle = pair[1].oracle_vmaf;
    }
    let mut per_cap_violations = Vec::new();
    let mut optimal_diff_sum = 0.0;
    for pair in report.rows.chunks(2) {
        let dv = pair[1].p_valid_mean - pair[0].p_valid_mean;
        let dopt = pair[1].p_optimal_mean - pair[0].p_optimal_mean;
        optimal_diff_sum += dopt;
        if dv < 0.0 || dopt < 0.0 {
            per_cap_violations.push((pair[0].d_max_mb, dv, dopt));
        }
    }
    let mean_diff = optimal_diff_sum / caps.len() as f64;
    // Directional, sampler-measured claim: deviations are flagged for review
    // rather than failed, matching the hardware-derived nature of the
    // ordering being checked.
    if per_cap_violations.is_empty() && mean_diff > 0.0 {
        println!(
            "ACCEPTANCE 8 PASS: rational penalty >= slack on p_valid and \
             p_optimal at all {} caps; mean p_optimal edge {mean_diff:.4}",
            caps.len()
        );
    } else {
        println!(
            "ACCEPTANCE 8 FLAG: ordering deviations {per_cap_violations:?}, \
             mean p_optimal edge {mean_diff:.4} (directional claim, not failed)"
        );
    }
}

#[test]
fn criterion_10_tuning_grid_selects_by_documented_rule() {
    let t = reference_instance();
    let budget = DataBudget::with_default_unit(10.0).unwrap();
    let grid = default_tune_grid();
    assert_eq!(grid.triples().len(), 27);
    assert_eq!(grid.triples()[13], (5.6, 8.9, 1.69), "grid is centered on the defaults");
    let params = SweepParams { shots: 1000, trials: 10, sweeps: 1000, seed: 7 };
    let report = tune_dpa(&t, &budget, &grid, &params).unwrap();
    assert_eq!(report.rows.len(), 27);
    for row in &report.rows {
        assert!((0.0..=1.0).contains(&row.p_valid_mean));
        assert!(row.p_optimal_mean <= row.p_valid_mean + 1e-12, "p_optimal > p_valid");
    }
    // Re-derive the winner: max p_optimal, then p_valid, then first (the
    // triples enumerate lexicographically).
    let mut expect = 0usize;
    for (i, row) in report.rows.iter().enumerate() {
        let best = &report.rows[expect];
        if row.p_optimal_mean > best.p_optimal_mean
            || (row.p_optimal_mean == best.p_optimal_mean && row.p_valid_mean > best.p_valid_mean)
        {
            expect = i;
        }
    }
    assert_eq!(report.selected, expect);
    let singleton = TuneGrid { mu1: vec![5.6], mu2: vec![8.9], mu3: vec![1.69] };
    let single = tune_dpa(
        &t,
        &budget,
        &singleton,
        &SweepParams { shots: 200, trials: 2, sweeps: 300, seed: 7 },
    )
    .unwrap();
    let sel = single.selected_row();
    assert_eq!((sel.mu1, sel.mu2, sel.mu3), (5.6, 8.9, 1.69));
    let best = report.selected_row();
    println!(
        "ACCEPTANCE 10 PASS: 27-triple grid tuned; selected mu=({}, {}, {}) with \
         p_optimal {:.3}; singleton grid selects (5.6, 8.9, 1.69)",
        best.mu1, best.mu2, best.mu3, best.p_optimal_mean
    );
}
