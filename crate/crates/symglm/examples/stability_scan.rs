//! Scan the linear stability matrix M(ixI) along the imaginary axis: the
//! eigenvalues of a symmetric method stay unimodular on an interval
//! (-i k0, i k0). Prints the interval edge found for each method and
//! writes one scan as CSV.
//!
//! ```bash
//! cargo run --example stability_scan
//! ```

use symglm::analysis::{imaginary_axis_scan, k0_bisect};
use symglm::tableau::registry;

fn main() {
    println!("{:<9} {:>10} {:>12}  stop", "method", "scan k0", "bisected k0");
    for name in [
        "4123A", "4123B", "4123C", "4223A", "4124A", "4124B", "4124C", "4124D", "4124E",
    ] {
        let m = &registry().lookup(name).unwrap().tableau;
        let scan = imaginary_axis_scan(m, 4.0, 400);
        let k0 = k0_bisect(m, 4.0);
        println!(
            "{:<9} {:>10.4} {:>12.6}  {:?}",
            name, scan.k0_estimate, k0, scan.stop
        );
    }

    let m = &registry().lookup("4123A").unwrap().tableau;
    let scan = imaginary_axis_scan(m, 3.0, 300);
    let path = std::env::temp_dir().join("symglm_scan_4123A.csv");
    std::fs::write(&path, scan.to_csv()).expect("write scan");
    println!("\nwrote {} ({} samples)", path.display(), scan.samples.len());
}
