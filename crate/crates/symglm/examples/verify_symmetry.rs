//! Run the full algebraic verification of one method, then demonstrate
//! that the checks see through coordinate changes: a transformed tableau
//! keeps its transfer function but loses the canonical form that the
//! parasitism test needs.
//!
//! ```bash
//! cargo run --example verify_symmetry
//! ```

use num_complex::Complex64;
use symglm::analysis::{all_checks, parasitism_factors, transfer_function};
use symglm::rational::{rat, rint, RatMat};
use symglm::tableau::{equivalence_transform, registry};

fn main() {
    let entry = registry().lookup("4124B").unwrap();
    println!("checks for {}:", entry.name);
    for report in all_checks(entry) {
        println!("  {report}");
    }

    // Same method in different value-space coordinates.
    let t = RatMat::from_rows(vec![
        vec![rint(1), rat(1, 2)],
        vec![rint(0), rat(2, 1)],
    ]);
    let transformed = equivalence_transform(&entry.tableau, &t).unwrap();
    let zeta = Complex64::new(2.0, 1.0);
    let n0 = transfer_function(&entry.tableau, zeta).unwrap();
    let n1 = transfer_function(&transformed, zeta).unwrap();
    println!(
        "\ntransfer function at zeta = 2+i unchanged under T: residual {:.3e}",
        n1.sub(&n0).max_abs()
    );
    match parasitism_factors(&transformed) {
        Ok(_) => println!("unexpected: transformed tableau still canonical"),
        Err(e) => println!("parasitism test on transformed tableau: {e}"),
    }
}
