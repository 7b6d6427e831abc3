//! Browser bindings: convolve two tuples, count points on the K3 fibre, and
//! compute the group generated by a tuple modulo a prime.
//!
//! Tuple arguments are either tuple-file text or `fixture:<name>`.

use std::fmt::Write as _;

use middleconv::convolution::{middle_convolution, rank_formula, ConvolutionInput};
use middleconv::fixtures;
use middleconv::io::{parse_tuple, write_tuple};
use middleconv::k3count::{default_fibre, frobenius_eigenvalues, trace_frobenius};
use middleconv::modgroup::{absolutely_irreducible, group_closure, o3_recognition, reduce_mod};
use middleconv::{Error, MonodromyTuple};
use wasm_bindgen::prelude::*;

/// Closure cap for the browser, where a long closure blocks the page.
pub const WEB_CAP: u64 = 20_000;

fn describe(e: Error) -> String {
    format!("{}: {e}", e.name())
}

fn load(src: &str) -> Result<MonodromyTuple, String> {
    let src = src.trim();
    match src.strip_prefix("fixture:") {
        Some(name) => fixtures::tuple(name.trim()),
        None => parse_tuple(src),
    }
    .map_err(describe)
}

fn local_data(t: &MonodromyTuple) -> String {
    let mut out = String::new();
    for (k, m) in t.entries().iter().enumerate() {
        let name = if k == t.r() { "inf".to_string() } else { format!("T{}", k + 1) };
        match m.jordan_data() {
            Ok(j) => writeln!(out, "{name}: {j}").unwrap(),
            Err(e) => writeln!(out, "{name}: {}", describe(e)).unwrap(),
        }
    }
    out
}

pub fn convolve_text(left: &str, right: &str) -> Result<String, String> {
    let inp = ConvolutionInput::new(load(left)?, load(right)?).map_err(describe)?;
    let rf = rank_formula(&inp).map_err(describe)?;
    let t = middle_convolution(&inp).map_err(describe)?;
    let mut out = format!("dimension {} (rank formula {}), {} finite points\n\n", t.dim(), rf.value, t.r());
    out.push_str(&local_data(&t));
    out.push('\n');
    out.push_str(&write_tuple(&t));
    Ok(out)
}

pub fn k3_text(p: u64) -> Result<String, String> {
    let z = default_fibre();
    let a = trace_frobenius(p, &z).map_err(describe)?;
    let b = trace_frobenius(p * p, &z).map_err(describe)?;
    let fd = frobenius_eigenvalues(p).map_err(describe)?;
    Ok(format!(
        "N({p}) = {}\nt_{p} = {}\nN({p}^2) = {}\nt_{p}^2 = {}\nalpha_{p} = {}\n(3/p) = {}, verified {}\n",
        a.n,
        a.trace,
        b.n,
        b.trace,
        fd.alpha_string(),
        fd.s3,
        fd.verified
    ))
}

pub fn group_text(tuple: &str, ell: u64) -> Result<String, String> {
    let t = reduce_mod(&load(tuple)?, ell).map_err(describe)?;
    let gens = t.entries();
    let mut out = format!("field {}\nabsolutely irreducible {}\n", t.field(), absolutely_irreducible(gens));
    if t.dim() == 3 && ell % 2 == 1 {
        match o3_recognition(gens, ell, WEB_CAP) {
            Ok(rep) => {
                writeln!(out, "order {}", rep.order).unwrap();
                if let Some(g) = rep.invariant_gram {
                    writeln!(out, "invariant form {g}").unwrap();
                }
                if let Some(name) = rep.recognized {
                    writeln!(out, "recognized {name}").unwrap();
                }
                return Ok(out);
            }
            Err(Error::NoInvariantForm) => out.push_str("no invariant symmetric form\n"),
            Err(e) => return Err(describe(e)),
        }
    }
    writeln!(out, "order {}", group_closure(gens, WEB_CAP).map_err(describe)?).unwrap();
    Ok(out)
}

/// Middle convolution of two tuples, rendered as text.
#[wasm_bindgen]
pub fn convolve(left: &str, right: &str) -> Result<String, JsError> {
    convolve_text(left, right).map_err(|e| JsError::new(&e))
}

/// Point counts, traces and the Frobenius eigenvalue at a prime p > 3.
#[wasm_bindgen]
pub fn k3(p: u32) -> Result<String, JsError> {
    k3_text(p as u64).map_err(|e| JsError::new(&e))
}

/// Order of the group generated by a tuple reduced modulo ell.
#[wasm_bindgen]
pub fn group(tuple: &str, ell: u32) -> Result<String, JsError> {
    group_text(tuple, ell as u64).map_err(|e| JsError::new(&e))
}
