//! Spectral transfer table of the Helmholtz filter and the deconvolution
//! operator on the one-dimensional Dirichlet oracle grid: per sine mode, the
//! exact responses, the gridded responses and the continuum exponential.
//!
//! Usage: cargo run --example oracle_table [-- alpha tau]

use deconv_les::oracle::oracle_table;
use deconv_les::SolverParams;

fn main() -> deconv_les::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha: f64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let tau: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5.0);
    let table = oracle_table(64, alpha, tau, 1.0, 10, &SolverParams::default())?;
    println!("alpha = {alpha}, tau = {tau}, dtau = 1, n = 64");
    print!("{table}");
    println!();
    println!("filter_gridded should match filter_exact, and deconv_gridded");
    println!("the closed form, to solver tolerance; deconv_exponential is the");
    println!("continuum limit the stepped values approach as dtau -> 0.");
    Ok(())
}
