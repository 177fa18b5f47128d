//! Checks the quadrature criteria against the Gaussian closed forms and prints
//! the comparison table. Same checks as `bayescv --mode oracle-check`.

use bayescv::oracle::{conjugate_checks, format_table};

fn main() -> bayescv::Result<()> {
    let seed = std::env::args().nth(1).map_or(20, |s| s.parse().expect("integer seed"));
    let checks = conjugate_checks(seed)?;
    print!("{}", format_table(&checks));
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(())
}
