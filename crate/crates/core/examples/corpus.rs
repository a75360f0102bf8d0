//! Run the bundled fixture corpus.

use lindblad_structure::corpus;
use lindblad_structure::linop::Tolerance;

fn main() {
    println!("fixtures: {}", corpus::names().join(", "));
    let report = corpus::run_named(&["dissipation", "cascade", "series-unique"], &Tolerance::default());
    print!("{}", report.to_text());
    std::process::exit(if report.passed() { 0 } else { 1 });
}
