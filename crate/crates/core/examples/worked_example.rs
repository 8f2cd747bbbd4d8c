//! The scripted 100-photon siphon-and-replace attack, pass by pass.
//!
//! cargo run --release --example worked_example

use tsqc::montecarlo::reproduce_worked_example;

fn main() {
    let trace = reproduce_worked_example(2013);
    println!("averaged over {} trials", trace.trials);
    for p in &trace.passes {
        let (good, bad) = p.stream();
        let (sg, sb) = p.stash();
        println!(
            "{}: took {:>2}, stream {{{good}, {bad}}}, Eve stash {{{sg}, {sb}}} SNR {:.2} (mean counts {:.2}/{:.2})",
            p.pass, p.taken, p.stash_snr(), p.stash_good_mean, p.stash_bad_mean
        );
    }
}
