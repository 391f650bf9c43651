use crate::expr::{eval_str, format_matrix};

/// Entry point of `readexpression "{...}"`: prints the evaluated matrix.
pub fn main_readexpression(args: &[String]) -> i32 {
    let Some(text) = args.first() else {
        eprintln!("usage: readexpression \"{{expression}}\"");
        return 2;
    };
    let text = if args.len() > 1 { args.join(" ") } else { text.clone() };
    match eval_str(&text) {
        Ok(m) => {
            print!("{}", format_matrix(&m));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
