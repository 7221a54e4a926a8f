//! Runs the default Burgers' discovery sweep and prints a per-size table.

use pde_select::pde::{add_target_noise, build_library, discovery_sweep, simulate_burgers, LibrarySpec};
use pde_select::{Domain, InitialCondition, SweepConfig};

fn main() -> pde_select::Result<()> {
    let nu = 0.1;
    let field = simulate_burgers(nu, &Domain::default(), &InitialCondition::sine())?;
    let clean = build_library(&field, &LibrarySpec::default(), 10_000, 0)?;
    let lib = add_target_noise(&clean, 0.1, 0)?;
    let sweep = discovery_sweep(&lib, lib.n_terms(), &SweepConfig::default())?;
    println!("{:>3} {:>14} {:>10} {:>12} {:>14} {:>14}  terms", "k", "-2logL", "U", "C", "ICOMP(1)", "ICOMP(logN)");
    for row in &sweep.rows {
        let c = row.complexity.map(|c| c.value).unwrap_or(f64::NAN);
        let u = row.uncertainty.map(|u| u.raw).unwrap_or(f64::NAN);
        let n2 = row.bic.as_ref().map(|s| s.neg2_loglik).unwrap_or(f64::NAN);
        let i1 = row.icomp.first().map(|s| s.total).unwrap_or(f64::NAN);
        let i2 = row.icomp.get(1).map(|s| s.total).unwrap_or(f64::NAN);
        println!("{:>3} {n2:>14.3} {u:>10.4} {c:>12.4} {i1:>14.3} {i2:>14.3}  {:?} {:?}", row.k, row.terms, row.errors);
    }
    for s in &sweep.selections {
        println!("{} a_N={:?}: {}", s.criterion, s.a_n, s.equation);
    }
    println!("complexity nondecreasing: {}", sweep.complexity_nondecreasing);
    Ok(())
}
