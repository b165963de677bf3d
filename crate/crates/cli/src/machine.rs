//! Machine-definition files.
//!
//! A machine file is a flat TOML table with a `kind` tag, the parameters of
//! that kind in SI units, an optional `[saturation]` table and an optional
//! `[[harmonics]]` array. The schema is documented in `docs/file-formats.md`.

use std::ops::Range;
use std::path::Path;

use cxlagrange::models::{
    CurveKind, Harmonic, ImParams, MachineParams, MagneticLagrangianModel, ModelKind, PmParams, SaturationCurve,
};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineFile {
    kind: Spanned<String>,
    n_p: Spanned<i64>,
    #[serde(rename = "J")]
    inertia: Spanned<f64>,
    #[serde(rename = "R_s")]
    r_s: Spanned<f64>,
    lambda: Option<Spanned<f64>>,
    mu: Option<Spanned<f64>>,
    ibar: Option<Spanned<f64>>,
    phibar: Option<Spanned<f64>>,
    #[serde(rename = "R_r")]
    r_r: Option<Spanned<f64>>,
    #[serde(rename = "L_m")]
    l_m: Option<Spanned<f64>>,
    #[serde(rename = "L_fs")]
    l_fs: Option<Spanned<f64>>,
    #[serde(rename = "L_fr")]
    l_fr: Option<Spanned<f64>>,
    saturation: Option<Spanned<SaturationBlock>>,
    #[serde(default)]
    harmonics: Vec<Spanned<HarmonicEntry>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SaturationBlock {
    kind: String,
    coefficients: Vec<f64>,
    range: [f64; 2],
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct HarmonicEntry {
    nu: i64,
    sigma_nu: i64,
    #[serde(rename = "L_nu")]
    l_nu: f64,
}

#[derive(Serialize)]
struct PmOut {
    kind: &'static str,
    n_p: u32,
    #[serde(rename = "J")]
    inertia: f64,
    #[serde(rename = "R_s")]
    r_s: f64,
    lambda: f64,
    mu: f64,
    ibar: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    saturation: Option<SaturationBlock>,
}

#[derive(Serialize)]
struct ImOut {
    kind: &'static str,
    n_p: u32,
    #[serde(rename = "J")]
    inertia: f64,
    #[serde(rename = "R_s")]
    r_s: f64,
    #[serde(rename = "R_r")]
    r_r: f64,
    #[serde(rename = "L_m")]
    l_m: f64,
    #[serde(rename = "L_fs")]
    l_fs: f64,
    #[serde(rename = "L_fr")]
    l_fr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    saturation: Option<SaturationBlock>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    harmonics: Vec<HarmonicEntry>,
}

/// 1-based line of a byte offset.
pub(crate) fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Ctx<'a> {
    text: &'a str,
    origin: &'a str,
}

impl Ctx<'_> {
    fn error(&self, span: Range<usize>, msg: impl std::fmt::Display) -> CliError {
        CliError::Config(format!("{}:{}: {msg}", self.origin, line_of(self.text, span.start)))
    }

    fn required(&self, v: &Option<Spanned<f64>>, key: &str, kind: &str) -> Result<f64, CliError> {
        v.as_ref()
            .map(|s| *s.get_ref())
            .ok_or_else(|| CliError::Config(format!("{}: `{key}` is required for {kind}", self.origin)))
    }

    fn forbid(&self, v: &Option<Spanned<f64>>, key: &str, kind: &str) -> Result<(), CliError> {
        match v {
            Some(s) => Err(self.error(s.span(), format!("`{key}` is not a parameter of {kind}"))),
            None => Ok(()),
        }
    }
}

/// Parses a machine definition. `origin` prefixes error messages.
pub fn parse_machine(text: &str, origin: &str) -> Result<MagneticLagrangianModel, CliError> {
    let file: MachineFile = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    let ctx = Ctx { text, origin };
    let kind = ModelKind::parse(file.kind.get_ref()).ok_or_else(|| {
        let names: Vec<&str> = ModelKind::ALL.iter().map(|k| k.name()).collect();
        ctx.error(
            file.kind.span(),
            format!(
                "unknown kind `{}`; expected one of {}",
                file.kind.get_ref(),
                names.join(", ")
            ),
        )
    })?;
    let n_p = u32::try_from(*file.n_p.get_ref())
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ctx.error(file.n_p.span(), "n_p must be a positive integer"))?;

    let saturation = match &file.saturation {
        Some(block) => {
            let b = block.get_ref();
            let curve_kind = CurveKind::parse(&b.kind).ok_or_else(|| {
                ctx.error(
                    block.span(),
                    format!(
                        "unknown saturation kind `{}`; expected constant, rational or polynomial",
                        b.kind
                    ),
                )
            })?;
            let curve = SaturationCurve::new(curve_kind, b.coefficients.clone(), (b.range[0], b.range[1]))
                .map_err(|e| ctx.error(block.span(), e))?;
            Some(curve)
        }
        None => None,
    };

    let name = kind.name();
    let params = if kind.is_pm() {
        for (v, key) in [
            (&file.r_r, "R_r"),
            (&file.l_m, "L_m"),
            (&file.l_fs, "L_fs"),
            (&file.l_fr, "L_fr"),
        ] {
            ctx.forbid(v, key, name)?;
        }
        if let Some(h) = file.harmonics.first() {
            return Err(ctx.error(h.span(), format!("{name} takes no harmonics")));
        }
        let lambda = ctx.required(&file.lambda, "lambda", name)?;
        let mu = file.mu.as_ref().map(|s| *s.get_ref()).unwrap_or(0.0);
        let ibar = match (&file.ibar, &file.phibar) {
            (Some(i), None) => *i.get_ref(),
            (None, Some(p)) => *p.get_ref() / lambda,
            (Some(_), Some(p)) => return Err(ctx.error(p.span(), "give either `ibar` or `phibar`, not both")),
            (None, None) => return Err(CliError::Config(format!("{origin}: {name} needs `ibar` or `phibar`"))),
        };
        MachineParams::Pm(PmParams {
            n_p,
            inertia: *file.inertia.get_ref(),
            r_s: *file.r_s.get_ref(),
            lambda,
            mu,
            ibar,
            saturation,
        })
    } else {
        for (v, key) in [
            (&file.lambda, "lambda"),
            (&file.mu, "mu"),
            (&file.ibar, "ibar"),
            (&file.phibar, "phibar"),
        ] {
            ctx.forbid(v, key, name)?;
        }
        let mut harmonics = Vec::with_capacity(file.harmonics.len());
        for h in &file.harmonics {
            let e = h.get_ref();
            let nu = u32::try_from(e.nu)
                .map_err(|_| ctx.error(h.span(), format!("nu must be a positive integer, got {}", e.nu)))?;
            let sigma = i8::try_from(e.sigma_nu)
                .map_err(|_| ctx.error(h.span(), format!("sigma_nu must be +1 or -1, got {}", e.sigma_nu)))?;
            harmonics.push(Harmonic {
                nu,
                sigma,
                l_nu: e.l_nu,
            });
        }
        MachineParams::Im(ImParams {
            n_p,
            inertia: *file.inertia.get_ref(),
            r_s: *file.r_s.get_ref(),
            r_r: ctx.required(&file.r_r, "R_r", name)?,
            l_m: ctx.required(&file.l_m, "L_m", name)?,
            l_fs: ctx.required(&file.l_fs, "L_fs", name)?,
            l_fr: ctx.required(&file.l_fr, "L_fr", name)?,
            harmonics,
            saturation,
        })
    };

    MagneticLagrangianModel::new(kind, params.clone()).map_err(|e| {
        let span = match &e {
            cxlagrange::Error::InvalidParameter { name: key, .. } => invalid_span(&file, &params, key),
            _ => None,
        };
        match span {
            Some(s) => ctx.error(s, e),
            None => CliError::Config(format!("{origin}: {e}")),
        }
    })
}

/// Location of the key named in a validation error.
fn invalid_span(file: &MachineFile, params: &MachineParams, key: &str) -> Option<Range<usize>> {
    let opt = |v: &Option<Spanned<f64>>| v.as_ref().map(|s| s.span());
    match key {
        "kind" => Some(file.kind.span()),
        "n_p" => Some(file.n_p.span()),
        "J" => Some(file.inertia.span()),
        "R_s" => Some(file.r_s.span()),
        "R_r" => opt(&file.r_r),
        "lambda" => opt(&file.lambda),
        "mu" => opt(&file.mu).or_else(|| opt(&file.lambda)),
        "ibar" => opt(&file.ibar).or_else(|| opt(&file.phibar)),
        "L_m" => opt(&file.l_m),
        "L_fs" => opt(&file.l_fs),
        "L_fr" => opt(&file.l_fr),
        "saturation" => file.saturation.as_ref().map(|s| s.span()),
        "nu" | "sigma_nu" | "L_nu" => {
            // The first harmonic that fails on its own.
            let MachineParams::Im(p) = params else { return None };
            p.harmonics.iter().zip(&file.harmonics).find_map(|(h, spanned)| {
                let single = ImParams {
                    harmonics: vec![*h],
                    ..p.clone()
                };
                single.validate().is_err().then(|| spanned.span())
            })
        }
        _ => None,
    }
}

pub fn load_machine(path: &Path) -> Result<MagneticLagrangianModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: cannot read machine file: {e}", path.display())))?;
    parse_machine(&text, &path.display().to_string())
}

fn saturation_out(curve: Option<&SaturationCurve>) -> Option<SaturationBlock> {
    curve.map(|c| SaturationBlock {
        kind: c.kind().name().to_string(),
        coefficients: c.coefficients().to_vec(),
        range: [c.range().0, c.range().1],
    })
}

/// Serializes a model so that `parse_machine` reproduces it exactly.
pub fn write_machine(model: &MagneticLagrangianModel) -> String {
    let kind = model.kind().name();
    let out = match model.params() {
        MachineParams::Pm(p) => toml::to_string(&PmOut {
            kind,
            n_p: p.n_p,
            inertia: p.inertia,
            r_s: p.r_s,
            lambda: p.lambda,
            mu: p.mu,
            ibar: p.ibar,
            saturation: saturation_out(p.saturation.as_ref()),
        }),
        MachineParams::Im(p) => toml::to_string(&ImOut {
            kind,
            n_p: p.n_p,
            inertia: p.inertia,
            r_s: p.r_s,
            r_r: p.r_r,
            l_m: p.l_m,
            l_fs: p.l_fs,
            l_fr: p.l_fr,
            saturation: saturation_out(p.saturation.as_ref()),
            harmonics: p
                .harmonics
                .iter()
                .map(|h| HarmonicEntry {
                    nu: h.nu as i64,
                    sigma_nu: h.sigma as i64,
                    l_nu: h.l_nu,
                })
                .collect(),
        }),
    };
    out.expect("machine parameters serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const PM: &str = r#"kind = "pm_saliency"
n_p = 3
J = 0.01
R_s = 1.0
lambda = 0.01
mu = 0.002
phibar = 0.1
"#;

    #[test]
    fn parses_phibar_form() {
        let m = parse_machine(PM, "pm.toml").unwrap();
        let p = m.pm_params().unwrap();
        assert_eq!(p.ibar, 0.1 / 0.01);
        assert_eq!(m.kind(), ModelKind::PmSaliency);
    }

    #[test]
    fn every_default_round_trips() {
        for kind in ModelKind::ALL {
            let m = MagneticLagrangianModel::default_for(kind);
            let text = write_machine(&m);
            assert_eq!(parse_machine(&text, "x").unwrap(), m, "{text}");
        }
    }

    #[test]
    fn errors_name_the_line() {
        let bad = PM.replace("lambda = 0.01", "lambda = -0.01");
        let err = parse_machine(&bad, "pm.toml").unwrap_err().to_string();
        assert!(err.starts_with("pm.toml:5:"), "{err}");
        assert!(err.contains("lambda"), "{err}");
        let unknown = format!("{PM}L_q = 0.3\n");
        let err = parse_machine(&unknown, "pm.toml").unwrap_err().to_string();
        assert!(err.contains("line 8") && err.contains("L_q"), "{err}");
    }

    #[test]
    fn rejects_foreign_keys_and_bad_harmonics() {
        let err = parse_machine(&format!("{PM}L_m = 0.1\n"), "pm.toml")
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("pm.toml:8:"), "{err}");
        let im = write_machine(&MagneticLagrangianModel::default_for(ModelKind::ImSatHarmonic));
        let bad = im.replace("sigma_nu = 1", "sigma_nu = 2");
        let err = parse_machine(&bad, "im.toml").unwrap_err().to_string();
        let line = bad.lines().position(|l| l.starts_with("[[harmonics]]")).unwrap() + 1;
        assert!(err.starts_with(&format!("im.toml:{line}:")), "{err}");
        assert!(err.contains("sigma_nu"), "{err}");
    }
}
