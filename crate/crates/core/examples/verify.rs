//! Run one group of acceptance checks from library code.
//!
//! cargo run --release --example verify -- macro

use dualfractal::verify::Verifier;

fn main() {
    let only = std::env::args().nth(1);
    let outcomes = Verifier::new().run_selected(only.as_deref());
    for outcome in &outcomes {
        println!("{}", outcome.line());
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed} of {} passed", outcomes.len());
}
