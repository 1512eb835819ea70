//! Minimal library walkthrough: build the demo model, solve it exactly, and
//! decode the ground state back into a per-segment plan.

use balance_core::{
    build_model, decode, enumerate_exact, reference_instance, DataBudget, PenaltyConfig,
};

fn main() -> balance_core::Result<()> {
    let table = reference_instance();
    let budget = DataBudget::with_default_unit(10.0)?;
    let model = build_model(&table, &budget, &PenaltyConfig::dpa())?;
    let ground = enumerate_exact(&model)?;
    let plan = decode(&model, &ground.bits, &table, &budget)?;
    let levels = plan.levels().expect("ground state picks one level per segment");
    println!(
        "levels {levels:?} -> VMAF {:.2} using {:.2} of {} MB",
        plan.total_vmaf, plan.total_data_mb, budget.d_max_mb
    );
    Ok(())
}
