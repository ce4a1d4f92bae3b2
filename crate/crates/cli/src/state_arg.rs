//! The `--state` mini-grammar:
//!
//! ```text
//! fock:N
//! coherent:Z
//! cat:Z,BRANCHES[,Z...]      one amplitude per branch, or none for equal weights
//! dyad:M,N,Z
//! file:PATH.json
//! ```
//!
//! `Z` is a complex literal such as `1`, `-0.5i`, `1+2i` or `1.5e-1-3e0i`.
//! Errors report the 0-based character position in the whole argument.

use cvbasis::fock::explicit_from_file;
use cvbasis::{Error, Result, StateSpec, C64};

fn err(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

fn parse_real(s: &str, at: usize) -> Result<f64> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => s
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| err(at, format!("invalid number {s:?}"))),
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`; `at` is the offset of `s` in the whole argument.
pub fn parse_complex(s: &str, at: usize) -> Result<C64> {
    let s_trim = s.trim();
    let at = at + (s.len() - s.trim_start().len());
    if s_trim.is_empty() {
        return Err(err(at, "expected a complex number"));
    }
    let Some(body) = s_trim.strip_suffix('i') else {
        if s_trim.chars().any(|ch| ch == 'i') {
            return Err(err(at + s_trim.find('i').unwrap(), "imaginary unit must end the literal"));
        }
        return Ok(C64::new(parse_real(s_trim, at)?, 0.0));
    };
    // Split at the last sign that is not leading and not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = parse_real(&body[..k], at)?;
            if body[..k].is_empty() {
                return Err(err(at, "missing real part"));
            }
            let im = parse_real(&body[k..], at + k)?;
            Ok(C64::new(re, im))
        }
        None => Ok(C64::new(0.0, parse_real(body, at)?)),
    }
}

fn parse_usize(s: &str, at: usize) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| err(at, format!("expected a nonnegative integer, got {s:?}")))
}

/// Comma-separated fields with their offsets.
fn fields(args: &str, base: usize) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (k, ch) in args.char_indices() {
        if ch == ',' {
            out.push((&args[start..k], base + start));
            start = k + 1;
        }
    }
    out.push((&args[start..], base + start));
    out
}

pub fn parse_state(spec: &str) -> Result<StateSpec> {
    let Some(colon) = spec.find(':') else {
        return Err(err(0, "expected kind:args"));
    };
    let (kind, args) = (&spec[..colon], &spec[colon + 1..]);
    let base = colon + 1;
    let f = fields(args, base);
    let arity = |lo: usize, hi: usize| -> Result<()> {
        if f.len() < lo || f.len() > hi {
            let pos = if f.len() > hi { f[hi].1 } else { spec.len() };
            return Err(err(pos, format!("{kind} takes {lo}..={hi} arguments, got {}", f.len())));
        }
        Ok(())
    };
    match kind {
        "fock" => {
            arity(1, 1)?;
            Ok(StateSpec::Fock(parse_usize(f[0].0, f[0].1)?))
        }
        "coherent" => {
            arity(1, 1)?;
            Ok(StateSpec::Coherent(parse_complex(f[0].0, f[0].1)?))
        }
        "cat" => {
            arity(2, usize::MAX)?;
            let alpha = parse_complex(f[0].0, f[0].1)?;
            let branches = parse_usize(f[1].0, f[1].1)?;
            if branches == 0 {
                return Err(err(f[1].1, "cat needs at least one branch"));
            }
            let amplitudes = if f.len() > 2 {
                if f.len() - 2 != branches {
                    return Err(err(f[2].1, format!("{} amplitudes for {branches} branches", f.len() - 2)));
                }
                Some(f[2..].iter().map(|(s, at)| parse_complex(s, *at)).collect::<Result<Vec<_>>>()?)
            } else {
                None
            };
            Ok(StateSpec::Cat {
                alpha,
                branches,
                amplitudes,
            })
        }
        "dyad" => {
            arity(3, 3)?;
            Ok(StateSpec::Dyad {
                m: parse_usize(f[0].0, f[0].1)?,
                n: parse_usize(f[1].0, f[1].1)?,
                mixing: parse_complex(f[2].0, f[2].1)?,
            })
        }
        "file" => {
            if args.is_empty() {
                return Err(err(base, "missing path"));
            }
            Ok(StateSpec::Explicit(explicit_from_file(args.as_ref())?))
        }
        _ => Err(err(0, format!("unknown state kind {kind:?}"))),
    }
}
