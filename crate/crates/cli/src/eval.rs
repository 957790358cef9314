use std::path::Path;

use clap::ValueEnum;
use ellhyp::series::{e_series, phi, phi_basic, w_series, BasicEParams, BasicPhiParams, EParams, PhiParams};
use ellhyp::{Error, ScaledComplex};
use serde::de::DeserializeOwned;

use crate::{Failure, EXIT_INPUT, EXIT_NUMERIC};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SeriesKind {
    Phi,
    E,
    PhiBasic,
    W,
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "<root>".to_string() } else { path };
        Failure::new(EXIT_INPUT, format!("field `{field}`: {}", e.inner()))
    })
}

fn numeric(err: Error) -> Failure {
    let code = match err {
        Error::PoleHit { .. } | Error::NonConvergent { .. } | Error::SingularMatrix { .. } | Error::IllConditioned { .. } => {
            EXIT_NUMERIC
        }
        _ => EXIT_INPUT,
    };
    Failure::new(code, err.to_string())
}

/// `re±imi` with the shortest round-trip digits.
pub fn plain(re: f64, im: f64) -> String {
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    format!("{re}{sign}{}i", im.abs())
}

pub fn render(value: &ScaledComplex) -> String {
    let mut out = value.to_string();
    if value.in_double_range() {
        let z = value.to_complex();
        out.push('\n');
        out.push_str(&plain(z.re, z.im));
    }
    out
}

pub fn run(kind: SeriesKind, path: &Path) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    let value = match kind {
        SeriesKind::Phi => phi(&parse::<PhiParams>(&text)?),
        SeriesKind::E => e_series(&parse::<EParams>(&text)?),
        SeriesKind::PhiBasic => phi_basic(&parse::<BasicPhiParams>(&text)?),
        SeriesKind::W => w_series(&parse::<BasicEParams>(&text)?),
    }
    .map_err(numeric)?;
    println!("{}", render(&value));
    Ok(0)
}
