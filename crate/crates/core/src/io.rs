//! File formats and deterministic serialization.
//!
//! Grid functions and maps travel as JSON with fixed field names; every
//! float in a data file is printed with 17 significant digits so repeated
//! runs are byte-identical.

use crate::error::{CoreError, Result};
use crate::grid::{GridFunction, TorusGrid};
use crate::map::TorusMap;
use num_complex::Complex64;
use serde_json::Value;
use std::io::Write;
use std::path::Path;

/// Serialize any `Serialize` value with 17-significant-digit floats
/// (NaN and infinities become `null`).
pub fn to_json_string<T: serde::Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&tree, &mut out);
    Ok(out)
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serialization"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key serialization"));
                out.push(':');
                write_value(item, out);
            }
            out.push('}');
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if !v.is_finite() {
        return "null".into();
    }
    if v == v.trunc() && v.abs() < 1e15 {
        return format!("{:.1}", v);
    }
    format!("{:.16e}", v)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let s = to_json_string(value)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(s.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

/// GridFunction JSON:
/// `{"d":int,"J":int,"length":float,"real":bool,"values":[...]}` with plain
/// floats for real functions and `[re, im]` pairs otherwise (row-major).
pub fn grid_function_to_json(f: &GridFunction) -> Value {
    let real = f.is_real();
    let values: Vec<Value> = if real {
        f.values().iter().map(|c| Value::from(c.re)).collect()
    } else {
        f.values().iter().map(|c| Value::from(vec![c.re, c.im])).collect()
    };
    serde_json::json!({
        "d": f.grid().d(),
        "J": f.grid().j(),
        "length": f.grid().length(),
        "real": real,
        "values": values,
    })
}

pub fn write_grid_function(path: &Path, f: &GridFunction) -> Result<()> {
    let v = grid_function_to_json(f);
    let mut out = String::new();
    write_value(&v, &mut out);
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn grid_function_from_json(v: &Value) -> Result<GridFunction> {
    let obj = v.as_object().ok_or_else(|| CoreError::MalformedInput("expected a JSON object".into()))?;
    let d = obj.get("d").and_then(Value::as_u64).ok_or_else(|| miss("d"))? as usize;
    let j = obj.get("J").and_then(Value::as_u64).ok_or_else(|| miss("J"))? as u32;
    let length = obj.get("length").and_then(Value::as_f64).unwrap_or(2.0 * std::f64::consts::PI);
    let real = obj.get("real").and_then(Value::as_bool).ok_or_else(|| miss("real"))?;
    let grid = TorusGrid::with_length(d, j, length)?;
    let raw = obj.get("values").and_then(Value::as_array).ok_or_else(|| miss("values"))?;
    if raw.len() != grid.total() {
        return Err(CoreError::MalformedInput(format!(
            "expected {} values, found {}",
            grid.total(),
            raw.len()
        )));
    }
    let values: Vec<Complex64> = raw
        .iter()
        .map(|item| -> Result<Complex64> {
            if real {
                let x = item.as_f64().ok_or_else(|| CoreError::MalformedInput("non-numeric value".into()))?;
                Ok(Complex64::new(x, 0.0))
            } else {
                let pair = item.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                    CoreError::MalformedInput("complex values must be [re, im] pairs".into())
                })?;
                let re = pair[0].as_f64().ok_or_else(|| CoreError::MalformedInput("bad re".into()))?;
                let im = pair[1].as_f64().ok_or_else(|| CoreError::MalformedInput("bad im".into()))?;
                Ok(Complex64::new(re, im))
            }
        })
        .collect::<Result<_>>()?;
    GridFunction::from_values(grid, values)
}

pub fn read_grid_function(path: &Path) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text)?;
    grid_function_from_json(&v)
}

/// TorusMap JSON: `{"d":int,"J":int,"g":[per-axis values],"is_diffeo":bool}`
/// (`is_diffeo` is recomputed on input).
pub fn torus_map_to_json(m: &TorusMap) -> Value {
    let g: Vec<Value> = m
        .displacement()
        .iter()
        .map(|gi| Value::Array(gi.values().iter().map(|c| Value::from(c.re)).collect()))
        .collect();
    serde_json::json!({
        "d": m.grid().d(),
        "J": m.grid().j(),
        "g": g,
        "is_diffeo": m.is_diffeo(),
    })
}

pub fn write_torus_map(path: &Path, m: &TorusMap) -> Result<()> {
    let v = torus_map_to_json(m);
    let mut out = String::new();
    write_value(&v, &mut out);
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn torus_map_from_json(v: &Value) -> Result<TorusMap> {
    let obj = v.as_object().ok_or_else(|| CoreError::MalformedInput("expected a JSON object".into()))?;
    let d = obj.get("d").and_then(Value::as_u64).ok_or_else(|| miss("d"))? as usize;
    let j = obj.get("J").and_then(Value::as_u64).ok_or_else(|| miss("J"))? as u32;
    let grid = TorusGrid::new(d, j)?;
    let comps = obj.get("g").and_then(Value::as_array).ok_or_else(|| miss("g"))?;
    if comps.len() != d {
        return Err(CoreError::MalformedInput(format!("expected {d} displacement components")));
    }
    let mut g = Vec::with_capacity(d);
    for comp in comps {
        let arr = comp.as_array().ok_or_else(|| CoreError::MalformedInput("g components must be arrays".into()))?;
        if arr.len() != grid.total() {
            return Err(CoreError::MalformedInput(format!(
                "expected {} samples per component, found {}",
                grid.total(),
                arr.len()
            )));
        }
        let vals: Vec<f64> = arr
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| CoreError::MalformedInput("non-numeric displacement".into())))
            .collect::<Result<_>>()?;
        g.push(GridFunction::from_real_values(grid, vals)?);
    }
    TorusMap::new(g)
}

pub fn read_torus_map(path: &Path) -> Result<TorusMap> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text)?;
    torus_map_from_json(&v)
}

fn miss(field: &str) -> CoreError {
    CoreError::MalformedInput(format!("missing field \"{field}\""))
}

/// decay.csv rows: `component,q,log2_sup,log2_l2`.
pub fn decay_csv(rows: &[(String, u32, f64, f64)]) -> String {
    let mut out = String::from("component,q,log2_sup,log2_l2\n");
    for (name, q, ls, ll) in rows {
        out.push_str(&format!("{name},{q},{},{}\n", fmt_f64(*ls), fmt_f64(*ll)));
    }
    out
}

/// blocks.csv rows: `q,sup,l2`.
pub fn blocks_csv(rows: &[(u32, f64, f64)]) -> String {
    let mut out = String::from("q,sup,l2\n");
    for (q, s, l) in rows {
        out.push_str(&format!("{q},{},{}\n", fmt_f64(*s), fmt_f64(*l)));
    }
    out
}

/// Minimal SVG line chart of per-component block decay (best effort; the
/// CSV is the contract).
pub fn decay_svg(series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (w, h, pad) = (640.0, 400.0, 40.0);
    let mut all: Vec<(f64, f64)> = series.iter().flat_map(|(_, pts)| pts.iter().copied()).collect();
    if all.is_empty() {
        all.push((0.0, 0.0));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = colors[i % colors.len()];
        let path: Vec<String> = pts
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| format!("{}{:.2},{:.2}", if k == 0 { "M" } else { "L" }, sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{name}</text>\n",
            w - pad - 60.0,
            pad + 14.0 * (i as f64 + 1.0)
        ));
    }
    svg.push_str(&format!(
        "<line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - pad,
        w - pad,
        h - pad
    ));
    svg.push_str(&format!("<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{}\" stroke=\"black\"/>\n", h - pad));
    svg.push_str("</svg>\n");
    svg
}
