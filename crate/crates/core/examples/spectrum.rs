//! Spectrum of the superoperator and the path classification of its clusters.

use lindblad_structure::corpus;
use lindblad_structure::linop::Tolerance;
use lindblad_structure::spectral::decompose;

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();
    for name in ["dissipation", "undamped-oscillation"] {
        let fixture = corpus::load(name)?;
        let sd = decompose(fixture.generator(), &tol)?;
        println!("== {name}");
        print!("{}", sd.to_text());
        println!("oscillating clusters: {}", sd.oscillating_count());
        println!("gap: {:?}\n", sd.gap());
    }

    let sd = decompose(corpus::load("dissipation")?.generator(), &tol)?;
    print!("{}", sd.to_csv_string()?);
    Ok(())
}
