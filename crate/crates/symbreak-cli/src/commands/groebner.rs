//! Raw Groebner basis computation on a polynomial system file.
//!
//! Input format matches the shipped fixtures: a "vars: x y z" header line
//! (the lex elimination order, most significant first), then one polynomial
//! per nonempty line.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use symbreak::algebra::{groebner_lex, GroebnerCaps, MultiPoly};

#[derive(Args, Debug)]
pub struct GroebnerArgs {
    /// Polynomial system file.
    #[arg(long)]
    pub input: PathBuf,
    /// Abort if the intermediate basis grows past this many elements.
    #[arg(long, default_value_t = GroebnerCaps::default().max_basis)]
    pub max_basis: usize,
    /// Abort if any coefficient grows past this many decimal digits.
    #[arg(long, default_value_t = GroebnerCaps::default().max_coeff_digits)]
    pub max_coeff_digits: u64,
}

fn parse_system(text: &str) -> Result<(Vec<String>, Vec<MultiPoly>)> {
    let mut vars: Option<Vec<String>> = None;
    let mut polys = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match (&vars, line.strip_prefix("vars:")) {
            (None, Some(rest)) => {
                let names: Vec<String> = rest.split_whitespace().map(str::to_owned).collect();
                if names.is_empty() {
                    bail!("line {}: empty variable list", lineno + 1);
                }
                vars = Some(names);
            }
            (None, None) => bail!("line {}: expected a \"vars:\" header first", lineno + 1),
            (Some(_), Some(_)) => bail!("line {}: duplicate \"vars:\" header", lineno + 1),
            (Some(names), None) => {
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let p = MultiPoly::parse(&refs, line)
                    .with_context(|| format!("line {}", lineno + 1))?;
                polys.push(p);
            }
        }
    }
    let vars = vars.context("missing \"vars:\" header")?;
    if polys.is_empty() {
        bail!("no polynomials in the system");
    }
    Ok((vars, polys))
}

pub fn run(args: &GroebnerArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let (vars, polys) = parse_system(&text)?;
    let caps = GroebnerCaps {
        max_basis: args.max_basis,
        max_coeff_digits: args.max_coeff_digits,
    };
    let basis = groebner_lex(&polys, &caps)
        .with_context(|| format!("computing the basis for {}", args.input.display()))?;
    println!("vars (lex, most significant first): {}", vars.join(" > "));
    println!("reduced lex basis ({} elements):", basis.len());
    for b in &basis {
        println!("  {b}");
    }
    Ok(0)
}
