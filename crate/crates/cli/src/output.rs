//! Number formatting and CSV/JSON emitters.

use serde::Serialize;
use serde_json::Value;

/// Six significant digits, trailing zeros trimmed.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        let s = format!("{v:.5e}");
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

/// `1/3`-style label for weights close to a fraction with a small denominator.
pub fn fraction(w: f64) -> String {
    for d in 1..=12u32 {
        let n = (w * d as f64).round();
        if (w * d as f64 - n).abs() < 1e-6 {
            return if d == 1 { format!("{n}") } else { format!("{n}/{d}") };
        }
    }
    format!("{w:.4}")
}

/// `(1/3)δ01+(2/3)δ10`; a single part prints as the bare rule.
pub fn rule_label(parts: &[(f64, Vec<usize>)]) -> String {
    let name = |actions: &[usize]| -> String {
        let sep = if actions.iter().any(|&a| a > 9) { "," } else { "" };
        let body: Vec<String> = actions.iter().map(usize::to_string).collect();
        format!("δ{}", body.join(sep))
    };
    if let [(_, actions)] = parts {
        return name(actions);
    }
    parts
        .iter()
        .map(|(w, a)| format!("({}){}", fraction(*w), name(a)))
        .collect::<Vec<_>>()
        .join("+")
}

#[derive(Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub version: String,
}

#[derive(Serialize)]
pub struct Document<'a, S: Serialize, R: Serialize> {
    pub scenario: &'a S,
    pub results: &'a R,
    pub provenance: Provenance,
}

pub fn to_json<T: Serialize>(doc: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        Value::Number(n) => {
            let s = match (n.as_u64(), n.as_i64()) {
                (Some(u), _) => u.to_string(),
                (None, Some(i)) => i.to_string(),
                _ => sig6(n.as_f64().unwrap_or(f64::NAN)),
            };
            out.push((prefix.to_string(), s));
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Null => out.push((prefix.to_string(), String::new())),
    }
}

/// One `key,value` row per leaf of the document, keys as dotted paths.
pub fn to_csv<T: Serialize>(doc: &T) -> anyhow::Result<String> {
    let mut rows = Vec::new();
    flatten("", &serde_json::to_value(doc)?, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"])?;
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
