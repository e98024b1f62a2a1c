//! Scenario files: a sectioned plain-text format with `[section]` headers
//! and `key = value` lines. Values are polynomial strings (the calculus
//! grammar), comma-separated lists of them, rationals, or numbers. Loading
//! is not fail-fast: every diagnosable error is collected and reported with
//! its location.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use momenta_core::bialgebra::{LieAlgebraData, LieBialgebraData};
use momenta_core::chart::{Chart, ChartDomain};
use momenta_core::fields::{BivectorField, FormField};
use momenta_core::group::{AbelianPi, BuiltinGroup, GroupModel};
use momenta_core::imm::{AlphaMap, MomentumCandidate};
use momenta_core::parse::parse_poly;
use momenta_core::poisson::{schouten_residual, PoissonManifold};
use momenta_core::poly::PolyExpr;
use momenta_core::rat::{parse_rat, rat_to_f64, Rat};
use num_traits::Zero;

/// One location-tagged load diagnostic.
#[derive(Debug, Clone)]
pub struct LoadError {
    pub line: usize,
    pub section: String,
    pub key: String,
    pub message: String,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}: [{}] {}: {}",
            self.line, self.section, self.key, self.message
        )
    }
}

/// All diagnostics from a failed load.
#[derive(Debug, Clone)]
pub struct LoadErrors(pub Vec<LoadError>);

impl fmt::Display for LoadErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.0 {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for LoadErrors {}

/// Deformation input: either the direction itself or a generating potential.
#[derive(Debug, Clone)]
pub enum DeformInput {
    Direction(Vec<PolyExpr>),
    Potential(PolyExpr),
}

/// Numeric options with their defaults resolved.
#[derive(Debug, Clone)]
pub struct Options {
    pub base_m: Vec<Rat>,
    pub base_u: Vec<Rat>,
    pub grid: Vec<usize>,
    pub step: f64,
    pub tol: f64,
    pub truncation: Option<u32>,
    pub grid_density: usize,
}

/// A fully materialized scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub raw: String,
    pub bialgebra: LieBialgebraData,
    pub group: GroupModel,
    pub manifold: PoissonManifold,
    pub alpha: Option<AlphaMap>,
    pub mu: Option<MomentumCandidate>,
    pub deform: Option<DeformInput>,
    pub options: Options,
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

type Sections = BTreeMap<String, Vec<Entry>>;

/// Load and validate a scenario file. With `unchecked` the manifold bivector
/// skips its construction-time Jacobi gate (diagnostic runs on broken data).
pub fn load_scenario(path: &Path, unchecked: bool) -> Result<Scenario, LoadErrors> {
    let raw = std::fs::read_to_string(path).map_err(|e| {
        LoadErrors(vec![LoadError {
            line: 0,
            section: String::new(),
            key: String::new(),
            message: format!("cannot read {}: {e}", path.display()),
        }])
    })?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    load_scenario_str(&raw, &name, unchecked)
}

/// Load from an in-memory string (used by tests and the loader itself).
pub fn load_scenario_str(
    raw: &str,
    name: &str,
    unchecked: bool,
) -> Result<Scenario, LoadErrors> {
    let mut errors = Vec::new();
    let sections = tokenize(raw, &mut errors);

    let known = [
        "algebra", "group", "manifold", "alpha", "mu", "deform", "options",
    ];
    for sec in sections.keys() {
        if !known.contains(&sec.as_str()) {
            errors.push(LoadError {
                line: 0,
                section: sec.clone(),
                key: String::new(),
                message: "unknown section".into(),
            });
        }
    }

    let bialgebra = build_algebra(&sections, &mut errors);
    let manifold_parts = build_manifold(&sections, unchecked, &mut errors);
    let group = bialgebra
        .as_ref()
        .and_then(|b| build_group(&sections, b, &mut errors));

    let alpha = match (&bialgebra, &manifold_parts) {
        (Some(b), Some(m)) => build_alpha(&sections, b, m, &mut errors),
        _ => None,
    };
    let mu = match (&group, &manifold_parts) {
        (Some(g), Some(m)) => build_mu(&sections, g, m, &mut errors),
        _ => None,
    };
    let deform = match (&bialgebra, &manifold_parts) {
        (Some(b), Some(m)) => build_deform(&sections, b, m, &mut errors),
        _ => None,
    };
    let options = build_options(
        &sections,
        manifold_parts.as_ref().map(|m| m.chart().clone()),
        group.as_ref().map(|g| g.chart().clone()),
        &mut errors,
    );

    if !errors.is_empty() {
        return Err(LoadErrors(errors));
    }
    Ok(Scenario {
        name: name.to_string(),
        raw: raw.to_string(),
        bialgebra: bialgebra.unwrap(),
        group: group.unwrap(),
        manifold: manifold_parts.unwrap(),
        alpha,
        mu,
        deform,
        options: options.unwrap(),
    })
}

fn tokenize(raw: &str, errors: &mut Vec<LoadError>) -> Sections {
    let mut sections: Sections = BTreeMap::new();
    let mut current = String::new();
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        let text = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(stripped) = text.strip_prefix('[') {
            match stripped.strip_suffix(']') {
                Some(name) => {
                    current = name.trim().to_string();
                    sections.entry(current.clone()).or_default();
                }
                None => errors.push(LoadError {
                    line: line_no,
                    section: current.clone(),
                    key: String::new(),
                    message: "malformed section header".into(),
                }),
            }
            continue;
        }
        match text.split_once('=') {
            Some((key, value)) => {
                if current.is_empty() {
                    errors.push(LoadError {
                        line: line_no,
                        section: String::new(),
                        key: key.trim().to_string(),
                        message: "entry before any [section] header".into(),
                    });
                    continue;
                }
                sections.get_mut(&current).unwrap().push(Entry {
                    line: line_no,
                    key: key.trim().to_string(),
                    value: value.trim().to_string(),
                });
            }
            None => errors.push(LoadError {
                line: line_no,
                section: current.clone(),
                key: String::new(),
                message: "expected `key = value`".into(),
            }),
        }
    }
    sections
}

fn err(errors: &mut Vec<LoadError>, line: usize, section: &str, key: &str, message: String) {
    errors.push(LoadError {
        line,
        section: section.to_string(),
        key: key.to_string(),
        message,
    });
}

fn single<'a>(
    sections: &'a Sections,
    section: &str,
    key: &str,
    errors: &mut Vec<LoadError>,
) -> Option<&'a Entry> {
    let entries: Vec<&Entry> = sections
        .get(section)?
        .iter()
        .filter(|e| e.key == key)
        .collect();
    match entries.len() {
        0 => None,
        1 => Some(entries[0]),
        _ => {
            err(
                errors,
                entries[1].line,
                section,
                key,
                "key given more than once".into(),
            );
            Some(entries[0])
        }
    }
}

fn split_names(text: &str) -> Vec<String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.to_string())
        .collect()
}

fn split_csv(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).collect()
}

/// Parse a linear combination of named basis elements:
/// `eta`, `-xi`, `1/2*xi + eta`, `2 * zeta - xi`.
fn parse_linear_combo(text: &str, names: &[String]) -> Result<Vec<(usize, Rat)>, String> {
    let mut out = Vec::new();
    for (sign, term) in split_signed_terms(text)? {
        let (coeff, name) = split_term(term)?;
        let idx = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| format!("unknown basis element `{name}`"))?;
        out.push((idx, coeff * sign));
    }
    Ok(out)
}

/// Parse a wedge combination `c * n1 ^ n2 + ...`.
fn parse_wedge_combo(
    text: &str,
    names: &[String],
) -> Result<Vec<(usize, usize, Rat)>, String> {
    let mut out = Vec::new();
    for (sign, term) in split_signed_terms(text)? {
        let (left, right) = term
            .split_once('^')
            .ok_or_else(|| format!("expected `name ^ name` in `{term}`"))?;
        let (coeff, lname) = split_term(left)?;
        let rname = right.trim();
        let i = names
            .iter()
            .position(|n| n == lname)
            .ok_or_else(|| format!("unknown basis element `{lname}`"))?;
        let j = names
            .iter()
            .position(|n| n == rname)
            .ok_or_else(|| format!("unknown basis element `{rname}`"))?;
        if i == j {
            return Err(format!("`{lname} ^ {rname}` is zero"));
        }
        out.push((i, j, coeff * sign));
    }
    Ok(out)
}

/// Split `a + b - c` into signed terms.
fn split_signed_terms(text: &str) -> Result<Vec<(Rat, &str)>, String> {
    let bytes = text.as_bytes();
    let mut terms = Vec::new();
    let mut start = 0usize;
    let mut sign = Rat::from_integer(1.into());
    let mut seen_content = false;
    for (i, &b) in bytes.iter().enumerate() {
        if (b == b'+' || b == b'-') && seen_content {
            let term = text[start..i].trim();
            if term.is_empty() {
                return Err("empty term".into());
            }
            terms.push((sign.clone(), term));
            sign = if b == b'+' {
                Rat::from_integer(1.into())
            } else {
                Rat::from_integer((-1).into())
            };
            start = i + 1;
            seen_content = false;
        } else if b == b'-' && !seen_content && text[start..i].trim().is_empty() {
            sign = -sign;
            start = i + 1;
        } else if !b.is_ascii_whitespace() {
            seen_content = true;
        }
    }
    let term = text[start..].trim();
    if term.is_empty() {
        return Err("empty term".into());
    }
    terms.push((sign, term));
    Ok(terms)
}

/// Split one term into `(coefficient, name)`: `eta`, `1/2*eta`, `2 eta`.
fn split_term(term: &str) -> Result<(Rat, &str), String> {
    let term = term.trim();
    if let Some((c, n)) = term.split_once('*') {
        let coeff = parse_rat(c).ok_or_else(|| format!("bad coefficient `{c}`"))?;
        return Ok((coeff, n.trim()));
    }
    // allow "2 eta" with whitespace
    if let Some(pos) = term.find(|c: char| c.is_whitespace()) {
        let (c, n) = term.split_at(pos);
        if let Some(coeff) = parse_rat(c) {
            return Ok((coeff, n.trim()));
        }
    }
    if let Some(coeff) = parse_rat(term) {
        return Err(format!("coefficient `{coeff}` without a basis element"));
    }
    Ok((Rat::from_integer(1.into()), term))
}

fn parse_box(
    text: &str,
    expected: usize,
) -> Result<Vec<(Rat, Rat)>, String> {
    let parts = split_csv(text);
    if parts.len() != expected {
        return Err(format!("expected {expected} intervals, got {}", parts.len()));
    }
    parts
        .iter()
        .map(|p| {
            let (lo, hi) = p
                .split_once("..")
                .ok_or_else(|| format!("expected `lo..hi` in `{p}`"))?;
            let lo = parse_rat(lo).ok_or_else(|| format!("bad rational `{lo}`"))?;
            let hi = parse_rat(hi).ok_or_else(|| format!("bad rational `{hi}`"))?;
            Ok((lo, hi))
        })
        .collect()
}

fn build_algebra(sections: &Sections, errors: &mut Vec<LoadError>) -> Option<LieBialgebraData> {
    let sec = "algebra";
    if !sections.contains_key(sec) {
        err(errors, 0, sec, "", "missing [algebra] section".into());
        return None;
    }
    let dim_entry = single(sections, sec, "dim", errors);
    let basis_entry = single(sections, sec, "basis", errors);
    let dim: usize = match dim_entry {
        Some(e) => match e.value.parse() {
            Ok(d) if d >= 1 => d,
            _ => {
                err(errors, e.line, sec, "dim", "dim must be a positive integer".into());
                return None;
            }
        },
        None => {
            err(errors, 0, sec, "dim", "missing".into());
            return None;
        }
    };
    let names: Vec<String> = match basis_entry {
        Some(e) => {
            let names = split_names(&e.value);
            if names.len() != dim {
                err(
                    errors,
                    e.line,
                    sec,
                    "basis",
                    format!("{} names for dim = {dim}", names.len()),
                );
                return None;
            }
            names
        }
        None => (1..=dim).map(|i| format!("e{i}")).collect(),
    };

    let mut bracket_entries = Vec::new();
    let mut cobracket_entries = Vec::new();
    for entry in sections.get(sec).unwrap() {
        match entry.key.as_str() {
            "bracket" => match parse_bracket_line(&entry.value, &names) {
                Ok(mut list) => bracket_entries.append(&mut list),
                Err(m) => err(errors, entry.line, sec, "bracket", m),
            },
            "cobracket" => match parse_cobracket_line(&entry.value, &names) {
                Ok(mut list) => cobracket_entries.append(&mut list),
                Err(m) => err(errors, entry.line, sec, "cobracket", m),
            },
            "dim" | "basis" => {}
            other => err(errors, entry.line, sec, other, "unknown key".into()),
        }
    }

    let algebra = match LieAlgebraData::from_sparse(names, &bracket_entries) {
        Ok(a) => a,
        Err(e) => {
            err(errors, 0, sec, "bracket", e.to_string());
            return None;
        }
    };
    match LieBialgebraData::from_sparse(algebra, &cobracket_entries) {
        Ok(b) => Some(b),
        Err(e) => {
            err(errors, 0, sec, "cobracket", e.to_string());
            None
        }
    }
}

/// `[n1, n2] = combo`
fn parse_bracket_line(
    value: &str,
    names: &[String],
) -> Result<Vec<(usize, usize, usize, Rat)>, String> {
    let (lhs, rhs) = value
        .split_once('=')
        .ok_or("expected `[a, b] = linear combination`")?;
    let lhs = lhs.trim();
    let inner = lhs
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or("left side must be `[a, b]`")?;
    let pair = split_names(inner);
    if pair.len() != 2 {
        return Err("left side must name two basis elements".into());
    }
    let i = names
        .iter()
        .position(|n| *n == pair[0])
        .ok_or_else(|| format!("unknown basis element `{}`", pair[0]))?;
    let j = names
        .iter()
        .position(|n| *n == pair[1])
        .ok_or_else(|| format!("unknown basis element `{}`", pair[1]))?;
    if i == j {
        return Err("bracket of an element with itself is zero".into());
    }
    let combo = parse_linear_combo(rhs, names)?;
    Ok(combo.into_iter().map(|(k, c)| (i, j, k, c)).collect())
}

/// `name = wedge combo`
fn parse_cobracket_line(
    value: &str,
    names: &[String],
) -> Result<Vec<(usize, usize, usize, Rat)>, String> {
    let (lhs, rhs) = value
        .split_once('=')
        .ok_or("expected `element = wedge combination`")?;
    let name = lhs.trim();
    let k = names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| format!("unknown basis element `{name}`"))?;
    let combo = parse_wedge_combo(rhs, names)?;
    Ok(combo.into_iter().map(|(i, j, c)| (k, i, j, c)).collect())
}

fn build_chart(
    sections: &Sections,
    sec: &str,
    errors: &mut Vec<LoadError>,
) -> Option<Chart> {
    let coords_entry = single(sections, sec, "coords", errors)?;
    let names = split_names(&coords_entry.value);
    if names.is_empty() {
        err(errors, coords_entry.line, sec, "coords", "no coordinates given".into());
        return None;
    }
    let intervals = match single(sections, sec, "box", errors) {
        Some(e) => match parse_box(&e.value, names.len()) {
            Ok(b) => b,
            Err(m) => {
                err(errors, e.line, sec, "box", m);
                return None;
            }
        },
        None => names
            .iter()
            .map(|_| {
                (
                    Rat::from_integer((-1).into()),
                    Rat::from_integer(1.into()),
                )
            })
            .collect(),
    };
    match ChartDomain::new(names, intervals) {
        Ok(c) => Some(c),
        Err(e) => {
            err(errors, coords_entry.line, sec, "coords", e.to_string());
            None
        }
    }
}

fn parse_poly_list(
    entry: &Entry,
    chart: &Chart,
    expected: usize,
    sec: &str,
    errors: &mut Vec<LoadError>,
) -> Option<Vec<PolyExpr>> {
    let parts = split_csv(&entry.value);
    if parts.len() != expected {
        err(
            errors,
            entry.line,
            sec,
            &entry.key,
            format!("expected {expected} comma-separated polynomials, got {}", parts.len()),
        );
        return None;
    }
    let mut out = Vec::with_capacity(expected);
    let mut ok = true;
    for p in &parts {
        match parse_poly(p, chart) {
            Ok(poly) => out.push(poly),
            Err(e) => {
                err(errors, entry.line, sec, &entry.key, format!("`{p}`: {e}"));
                ok = false;
            }
        }
    }
    ok.then_some(out)
}

fn build_manifold(
    sections: &Sections,
    unchecked: bool,
    errors: &mut Vec<LoadError>,
) -> Option<PoissonManifold> {
    let sec = "manifold";
    if !sections.contains_key(sec) {
        err(errors, 0, sec, "", "missing [manifold] section".into());
        return None;
    }
    let chart = build_chart(sections, sec, errors)?;
    let m = chart.dim();
    let n_comps = m * (m - 1) / 2;
    let pi = match single(sections, sec, "pi", errors) {
        Some(e) => {
            let polys = parse_poly_list(e, &chart, n_comps, sec, errors)?;
            match BivectorField::from_upper(&chart, polys) {
                Ok(b) => b,
                Err(er) => {
                    err(errors, e.line, sec, "pi", er.to_string());
                    return None;
                }
            }
        }
        None => BivectorField::zero(&chart),
    };
    if unchecked {
        return Some(PoissonManifold::new_unchecked(pi));
    }
    match PoissonManifold::new(pi) {
        Ok(p) => Some(p),
        Err(e) => {
            err(
                errors,
                0,
                sec,
                "pi",
                format!("{e} (pass --unchecked to load anyway)"),
            );
            None
        }
    }
}

fn build_group(
    sections: &Sections,
    bialgebra: &LieBialgebraData,
    errors: &mut Vec<LoadError>,
) -> Option<GroupModel> {
    let sec = "group";
    if !sections.contains_key(sec) {
        err(errors, 0, sec, "", "missing [group] section".into());
        return None;
    }
    let kind_entry = single(sections, sec, "kind", errors);
    let kind = kind_entry.map(|e| e.value.as_str()).unwrap_or("custom");
    let n = bialgebra.dim();

    let pi_entry = single(sections, sec, "pi", errors);
    let result = match kind {
        "abelian" => {
            let pi_mode = match pi_entry.map(|e| e.value.as_str()) {
                None | Some("zero") => AbelianPi::Zero,
                Some("lie_poisson") => AbelianPi::LiePoisson,
                Some(other) => {
                    err(
                        errors,
                        pi_entry.unwrap().line,
                        sec,
                        "pi",
                        format!("abelian pi must be `zero` or `lie_poisson`, got `{other}`"),
                    );
                    AbelianPi::Zero
                }
            };
            GroupModel::builtin(BuiltinGroup::Abelian(n), Some(bialgebra.clone()), pi_mode)
        }
        "heisenberg" => {
            if let Some(e) = pi_entry {
                err(
                    errors,
                    e.line,
                    sec,
                    "pi",
                    "the heisenberg builtin derives its bivector from the bialgebra".into(),
                );
            }
            GroupModel::builtin(BuiltinGroup::Heisenberg, Some(bialgebra.clone()), AbelianPi::Zero)
        }
        "affine" => {
            GroupModel::builtin(BuiltinGroup::Affine, Some(bialgebra.clone()), AbelianPi::Zero)
        }
        "custom" => build_custom_group(sections, bialgebra, errors)?,
        other => {
            err(
                errors,
                kind_entry.map(|e| e.line).unwrap_or(0),
                sec,
                "kind",
                format!("unknown group kind `{other}`"),
            );
            return None;
        }
    };
    match result {
        Ok(g) => Some(g),
        Err(e) => {
            err(errors, 0, sec, "kind", e.to_string());
            None
        }
    }
}

fn build_custom_group(
    sections: &Sections,
    bialgebra: &LieBialgebraData,
    errors: &mut Vec<LoadError>,
) -> Option<Result<GroupModel, momenta_core::error::GroupError>> {
    let sec = "group";
    let chart = build_chart(sections, sec, errors)?;
    let n = chart.dim();
    let product = match chart.product(&chart) {
        Ok(p) => p,
        Err(e) => {
            err(errors, 0, sec, "coords", e.to_string());
            return None;
        }
    };
    let mult_entry = single(sections, sec, "mult", errors);
    let mult = match mult_entry {
        Some(e) => parse_poly_list(e, &product, n, sec, errors)?,
        None => {
            err(errors, 0, sec, "mult", "a custom group needs a `mult` law".into());
            return None;
        }
    };
    let coframe = match single(sections, sec, "coframe", errors) {
        Some(e) => {
            let polys = parse_poly_list(e, &chart, n * n, sec, errors)?;
            Some(polys.chunks(n).map(|row| row.to_vec()).collect())
        }
        None => None,
    };
    let pi = match single(sections, sec, "pi", errors) {
        Some(e) => {
            let polys = parse_poly_list(e, &chart, n * (n - 1) / 2, sec, errors)?;
            match BivectorField::from_upper(&chart, polys) {
                Ok(b) => Some(b),
                Err(er) => {
                    err(errors, e.line, sec, "pi", er.to_string());
                    return None;
                }
            }
        }
        None => None,
    };
    Some(GroupModel::new(chart, mult, coframe, pi, bialgebra.clone()))
}

fn build_alpha(
    sections: &Sections,
    bialgebra: &LieBialgebraData,
    manifold: &PoissonManifold,
    errors: &mut Vec<LoadError>,
) -> Option<AlphaMap> {
    let sec = "alpha";
    let entries = sections.get(sec)?;
    let names = bialgebra.algebra().basis_names();
    let chart = manifold.chart();
    let m = chart.dim();
    let mut forms: Vec<Option<FormField>> = vec![None; names.len()];
    let before = errors.len();
    for entry in entries {
        match names.iter().position(|n| *n == entry.key) {
            Some(i) => {
                if forms[i].is_some() {
                    err(errors, entry.line, sec, &entry.key, "given more than once".into());
                    continue;
                }
                if let Some(polys) = parse_poly_list(entry, chart, m, sec, errors) {
                    forms[i] = Some(FormField::one_form(chart, polys));
                }
            }
            None => err(
                errors,
                entry.line,
                sec,
                &entry.key,
                "not a basis element of the algebra".into(),
            ),
        }
    }
    for (i, f) in forms.iter().enumerate() {
        if f.is_none() {
            err(
                errors,
                0,
                sec,
                &names[i],
                "missing 1-form for this basis element".into(),
            );
        }
    }
    if errors.len() > before {
        return None;
    }
    let forms: Vec<FormField> = forms.into_iter().map(|f| f.unwrap()).collect();
    match AlphaMap::new(manifold.clone(), bialgebra.clone(), forms) {
        Ok(a) => Some(a),
        Err(e) => {
            err(errors, 0, sec, "", e.to_string());
            None
        }
    }
}

fn build_mu(
    sections: &Sections,
    group: &GroupModel,
    manifold: &PoissonManifold,
    errors: &mut Vec<LoadError>,
) -> Option<MomentumCandidate> {
    let sec = "mu";
    sections.get(sec)?;
    let entry = single(sections, sec, "map", errors);
    let entry = match entry {
        Some(e) => e,
        None => {
            err(errors, 0, sec, "map", "missing".into());
            return None;
        }
    };
    let polys = parse_poly_list(entry, manifold.chart(), group.dim(), sec, errors)?;
    match MomentumCandidate::new(group.clone(), polys) {
        Ok(mu) => Some(mu),
        Err(e) => {
            err(errors, entry.line, sec, "map", e.to_string());
            None
        }
    }
}

fn build_deform(
    sections: &Sections,
    bialgebra: &LieBialgebraData,
    manifold: &PoissonManifold,
    errors: &mut Vec<LoadError>,
) -> Option<DeformInput> {
    let sec = "deform";
    sections.get(sec)?;
    let h_entry = single(sections, sec, "h", errors);
    let phi_entry = single(sections, sec, "phi", errors);
    match (h_entry, phi_entry) {
        (Some(e), None) => {
            let polys = parse_poly_list(e, manifold.chart(), bialgebra.dim(), sec, errors)?;
            Some(DeformInput::Direction(polys))
        }
        (None, Some(e)) => match parse_poly(&e.value, manifold.chart()) {
            Ok(p) => Some(DeformInput::Potential(p)),
            Err(er) => {
                err(errors, e.line, sec, "phi", er.to_string());
                None
            }
        },
        (Some(e), Some(_)) => {
            err(errors, e.line, sec, "h", "give either `h` or `phi`, not both".into());
            None
        }
        (None, None) => {
            err(errors, 0, sec, "", "needs `h` or `phi`".into());
            None
        }
    }
}

fn build_options(
    sections: &Sections,
    mchart: Option<Chart>,
    gchart: Option<Chart>,
    errors: &mut Vec<LoadError>,
) -> Option<Options> {
    let sec = "options";
    let mdim = mchart.as_ref().map(|c| c.dim()).unwrap_or(0);
    let gdim = gchart.as_ref().map(|c| c.dim()).unwrap_or(0);

    let mut opts = Options {
        base_m: mchart
            .as_ref()
            .map(|c| c.center())
            .unwrap_or_default(),
        base_u: gchart
            .as_ref()
            .map(|c| c.center())
            .unwrap_or_default(),
        grid: vec![5; mdim],
        step: 1e-3,
        tol: 1e-6,
        truncation: None,
        grid_density: 5,
    };

    let Some(entries) = sections.get(sec) else {
        return Some(opts);
    };

    for entry in entries {
        let parse_rats = |value: &str, expected: usize| -> Result<Vec<Rat>, String> {
            let parts = split_csv(value);
            if parts.len() != expected {
                return Err(format!("expected {expected} rationals, got {}", parts.len()));
            }
            parts
                .iter()
                .map(|p| parse_rat(p).ok_or_else(|| format!("bad rational `{p}`")))
                .collect()
        };
        match entry.key.as_str() {
            "base_m" => match parse_rats(&entry.value, mdim) {
                Ok(v) => opts.base_m = v,
                Err(m) => err(errors, entry.line, sec, "base_m", m),
            },
            "base_u" => match parse_rats(&entry.value, gdim) {
                Ok(v) => opts.base_u = v,
                Err(m) => err(errors, entry.line, sec, "base_u", m),
            },
            "grid" => {
                let parts = split_csv(&entry.value);
                let parsed: Result<Vec<usize>, _> =
                    parts.iter().map(|p| p.parse::<usize>()).collect();
                match parsed {
                    Ok(v) if v.len() == mdim && v.iter().all(|&g| g >= 2) => opts.grid = v,
                    Ok(v) if v.len() == 1 && v[0] >= 2 => opts.grid = vec![v[0]; mdim],
                    _ => err(
                        errors,
                        entry.line,
                        sec,
                        "grid",
                        format!("expected {mdim} (or one) integers >= 2"),
                    ),
                }
            }
            "step" => match parse_float(&entry.value) {
                Some(v) if v > 0.0 => opts.step = v,
                _ => err(errors, entry.line, sec, "step", "expected a positive number".into()),
            },
            "tol" => match parse_float(&entry.value) {
                Some(v) if v >= 0.0 => opts.tol = v,
                _ => err(errors, entry.line, sec, "tol", "expected a number".into()),
            },
            "truncation" => match entry.value.parse::<u32>() {
                Ok(v) => opts.truncation = Some(v),
                Err(_) => err(errors, entry.line, sec, "truncation", "expected an integer".into()),
            },
            "grid_density" => match entry.value.parse::<usize>() {
                Ok(v) if v >= 2 => opts.grid_density = v,
                _ => err(errors, entry.line, sec, "grid_density", "expected an integer >= 2".into()),
            },
            other => err(errors, entry.line, sec, other, "unknown key".into()),
        }
    }

    let check_inside = |chart: &Option<Chart>, pt: &[Rat]| -> bool {
        chart.as_ref().map(|c| c.contains_rat(pt)).unwrap_or(true)
    };
    if !check_inside(&mchart, &opts.base_m) {
        err(errors, 0, sec, "base_m", "base point outside the manifold box".into());
    }
    if !check_inside(&gchart, &opts.base_u) {
        err(errors, 0, sec, "base_u", "base point outside the group box".into());
    }
    Some(opts)
}

fn parse_float(text: &str) -> Option<f64> {
    if let Ok(v) = text.parse::<f64>() {
        return Some(v);
    }
    parse_rat(text).map(|r| rat_to_f64(&r))
}

/// Summarize the manifold's Jacobi defect for reports (used when loading
/// unchecked data).
pub fn manifold_schouten_sup(manifold: &PoissonManifold) -> Rat {
    schouten_residual(manifold.pi())
        .iter()
        .map(|(_, p)| p.max_abs_coeff())
        .max()
        .unwrap_or_else(Rat::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[algebra]
dim = 2
basis = xi1 xi2

[group]
kind = abelian

[manifold]
coords = x y
box = -1..1, -1..1
pi = 1

[alpha]
xi1 = 0, -1
xi2 = 1, 0
";

    #[test]
    fn loads_a_minimal_scenario() {
        let s = load_scenario_str(MINIMAL, "minimal.scn", false).unwrap();
        assert_eq!(s.bialgebra.dim(), 2);
        assert_eq!(s.group.dim(), 2);
        assert!(s.alpha.is_some());
        assert_eq!(s.options.grid, vec![5, 5]);
        assert_eq!(s.options.step, 1e-3);
    }

    #[test]
    fn collects_every_error() {
        let bad = "\
[algebra]
dim = 2
basis = xi1 xi2

[group]
kind = abelian

[manifold]
coords = x y
pi = x+*y

[alpha]
xi1 = 0, -1
xi2 = 1, 0, 3
xi3 = 1, 0
";
        let errs = match load_scenario_str(bad, "bad.scn", false) {
            Err(e) => e.0,
            Ok(_) => panic!("expected failure"),
        };
        // malformed polynomial, wrong arity, unknown basis element
        assert!(errs.len() >= 3, "{errs:?}");
        assert!(errs.iter().any(|e| e.key == "pi"));
        assert!(errs.iter().any(|e| e.key == "xi2"));
        assert!(errs.iter().any(|e| e.key == "xi3"));
    }

    #[test]
    fn dimension_mismatch_names_the_section() {
        let bad = MINIMAL.replace("xi2 = 1, 0\n", "");
        let errs = match load_scenario_str(&bad, "bad.scn", false) {
            Err(e) => e.0,
            Ok(_) => panic!("expected failure"),
        };
        assert!(errs.iter().any(|e| e.section == "alpha" && e.key == "xi2"));
    }

    #[test]
    fn bracket_and_cobracket_lines_parse() {
        let text = "\
[algebra]
dim = 3
basis = xi, eta, zeta
bracket = [xi, zeta] = eta
bracket = [eta, zeta] = -xi
cobracket = zeta = xi ^ eta

[group]
kind = heisenberg

[manifold]
coords = a b c
pi = 0, b, -a

[alpha]
xi = 1, 0, 0
eta = 0, 1, 0
zeta = 1/2*b, -1/2*a, 1
";
        let s = load_scenario_str(text, "h.scn", false).unwrap();
        assert_eq!(s.bialgebra.algebra().c(0, 2, 1), &Rat::from_integer(1.into()));
        assert_eq!(s.bialgebra.d(2, 0, 1), &Rat::from_integer(1.into()));
        assert_eq!(s.group.dim(), 3);
    }

    #[test]
    fn schouten_gate_respects_unchecked() {
        let text = "\
[algebra]
dim = 1
basis = xi

[group]
kind = abelian

[manifold]
coords = x y z
pi = z + x^2, 1, x

[alpha]
xi = 1, 0, 0
";
        assert!(load_scenario_str(text, "s.scn", false).is_err());
        let s = load_scenario_str(text, "s.scn", true).unwrap();
        assert!(!manifold_schouten_sup(&s.manifold).is_zero());
    }
}
