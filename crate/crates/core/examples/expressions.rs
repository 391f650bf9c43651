//! Evaluates expressions of the operator language given on the command line,
//! or a few samples.

use ace_core::expr::{eval_str, format_matrix};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let samples = [
        "{hbar/2*(|0><1|_2+|1><0|_2)}",
        "{bdagger_3*b_3}",
        "{|1><1|_2 otimes Id_2}",
        "{exp(i*pi/4)*sigma_x}",
        "{2*pi/hbar}",
    ];
    let inputs: Vec<String> = if args.is_empty() { samples.iter().map(|s| s.to_string()).collect() } else { args };
    for text in inputs {
        println!("{text}");
        match eval_str(&text) {
            Ok(m) => print!("{}", format_matrix(&m)),
            Err(e) => println!("error: {e}"),
        }
        println!();
    }
}
