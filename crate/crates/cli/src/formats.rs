//! File formats: JSON module/stability documents (rationals as "p/q"
//! strings) and a strict firep-style text layout for module presentations.
//!
//! Parsing is two-phase: syntax first (JSON shape or text layout, reported
//! with positions), then semantic construction through the library's own
//! validators. Emitted documents re-parse to equal values.

use hnpers::module::{Presentation, Relation};
use hnpers::scalar::{format_rat, parse_rat, Rat};
use hnpers::stability::{
    AlphaSpec, AlphaTerm, BetaSpec, CarrierAxis, SignPolicy, StabilityCondition,
};
use serde::{Deserialize, Serialize};

/// A syntax-level failure: the document does not match the format.
pub type ParseError = String;

/// Computation field selected by a module document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldChoice {
    Rational,
    Prime(u64),
}

impl std::fmt::Display for FieldChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldChoice::Rational => write!(f, "Q"),
            FieldChoice::Prime(p) => write!(f, "F_{p}"),
        }
    }
}

// ---------------------------------------------------------------------------
// module documents

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldDoc {
    /// `"rational"`.
    Name(String),
    /// `{"prime": p}`.
    Prime { prime: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    pub point: Vec<String>,
    pub coeffs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDoc {
    pub n: usize,
    pub field: FieldDoc,
    pub generators: Vec<Vec<String>>,
    #[serde(default)]
    pub relations: Vec<RelationDoc>,
}

fn parse_point(coords: &[String], what: &str) -> Result<Vec<Rat>, ParseError> {
    coords
        .iter()
        .map(|s| parse_rat(s).map_err(|e| format!("{what}: bad rational {s:?}: {e}")))
        .collect()
}

impl ModuleDoc {
    pub fn from_json(text: &str) -> Result<ModuleDoc, ParseError> {
        serde_json::from_str(text).map_err(|e| format!("module document: {e}"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("module documents serialise")
    }

    /// Semantic phase: rationals parsed, field resolved. The presentation is
    /// validated later by realisation.
    pub fn to_presentation(&self) -> Result<(Presentation, FieldChoice), ParseError> {
        let field = match &self.field {
            FieldDoc::Name(s) if s == "rational" => FieldChoice::Rational,
            FieldDoc::Name(s) => {
                return Err(format!(
                    "module document: unknown field {s:?} (use \"rational\" or {{\"prime\": p}})"
                ))
            }
            FieldDoc::Prime { prime } => FieldChoice::Prime(*prime),
        };
        let mut generators = Vec::with_capacity(self.generators.len());
        for (i, g) in self.generators.iter().enumerate() {
            if g.len() != self.n {
                return Err(format!(
                    "module document: generator {i} has {} coordinates, expected {}",
                    g.len(),
                    self.n
                ));
            }
            generators.push(parse_point(g, &format!("generator {i}"))?);
        }
        let mut relations = Vec::with_capacity(self.relations.len());
        for (i, r) in self.relations.iter().enumerate() {
            if r.point.len() != self.n {
                return Err(format!(
                    "module document: relation {i} has {} coordinates, expected {}",
                    r.point.len(),
                    self.n
                ));
            }
            if r.coeffs.len() != self.generators.len() {
                return Err(format!(
                    "module document: relation {i} has {} coefficients for {} generators",
                    r.coeffs.len(),
                    self.generators.len()
                ));
            }
            relations.push(Relation {
                position: parse_point(&r.point, &format!("relation {i} point"))?,
                coeffs: parse_point(&r.coeffs, &format!("relation {i} coefficients"))?,
            });
        }
        Ok((
            Presentation {
                n: self.n,
                generators,
                relations,
            },
            field,
        ))
    }

    pub fn from_presentation(p: &Presentation, field: FieldChoice) -> ModuleDoc {
        ModuleDoc {
            n: p.n,
            field: match field {
                FieldChoice::Rational => FieldDoc::Name("rational".to_string()),
                FieldChoice::Prime(prime) => FieldDoc::Prime { prime },
            },
            generators: p
                .generators
                .iter()
                .map(|g| g.iter().map(format_rat).collect())
                .collect(),
            relations: p
                .relations
                .iter()
                .map(|r| RelationDoc {
                    point: r.position.iter().map(format_rat).collect(),
                    coeffs: r.coeffs.iter().map(format_rat).collect(),
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// firep-style text modules
//
// Layout (strict; `#` comments and blank lines are skipped):
//
//     firep <n>
//     <generator count>
//     <relation count>
//     x1 x2 ... xn            (one line per generator)
//     x1 ... xn ; c1 ... cg   (one line per relation)
//
// Anything else is rejected with its line number.

/// Returns `Some` if the text looks like a firep block (first significant
/// line starts with the keyword).
pub fn looks_like_firep(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l == "firep" || l.starts_with("firep "))
}

pub fn parse_firep(text: &str) -> Result<Presentation, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| format!("firep: unexpected end of file, expected {what}"))
    };

    let (ln, header) = next("the header line")?;
    let n: usize = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["firep", n] => n
            .parse()
            .map_err(|_| format!("firep line {ln}: bad parameter count {n:?}"))?,
        ["firep"] => return Err(format!("firep line {ln}: header needs a parameter count")),
        _ => return Err(format!("firep line {ln}: expected \"firep <n>\"")),
    };
    if n == 0 {
        return Err(format!("firep line {ln}: the parameter count must be positive"));
    }
    let (ln, gl) = next("the generator count")?;
    let g: usize = gl
        .parse()
        .map_err(|_| format!("firep line {ln}: bad generator count {gl:?}"))?;
    let (ln, rl) = next("the relation count")?;
    let r: usize = rl
        .parse()
        .map_err(|_| format!("firep line {ln}: bad relation count {rl:?}"))?;

    let parse_coords = |ln: usize, tokens: &[&str]| -> Result<Vec<Rat>, ParseError> {
        tokens
            .iter()
            .map(|t| parse_rat(t).map_err(|e| format!("firep line {ln}: bad rational {t:?}: {e}")))
            .collect()
    };

    let mut generators = Vec::with_capacity(g);
    for k in 0..g {
        let (ln, line) = next(&format!("generator row {k}"))?;
        if line.contains(';') {
            return Err(format!(
                "firep line {ln}: generator rows carry coordinates only, found \";\""
            ));
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != n {
            return Err(format!(
                "firep line {ln}: generator row has {} coordinates, expected {n}",
                tokens.len()
            ));
        }
        generators.push(parse_coords(ln, &tokens)?);
    }

    let mut relations = Vec::with_capacity(r);
    for k in 0..r {
        let (ln, line) = next(&format!("relation row {k}"))?;
        let Some((coord_part, coeff_part)) = line.split_once(';') else {
            return Err(format!(
                "firep line {ln}: relation rows are \"coords ; coeffs\", missing \";\""
            ));
        };
        let coords: Vec<&str> = coord_part.split_whitespace().collect();
        if coords.len() != n {
            return Err(format!(
                "firep line {ln}: relation row has {} coordinates, expected {n}",
                coords.len()
            ));
        }
        let coeffs: Vec<&str> = coeff_part.split_whitespace().collect();
        if coeffs.len() != g {
            return Err(format!(
                "firep line {ln}: relation row has {} coefficients for {g} generators",
                coeffs.len()
            ));
        }
        relations.push(Relation {
            position: parse_coords(ln, &coords)?,
            coeffs: parse_coords(ln, &coeffs)?,
        });
    }

    if let Some((ln, line)) = lines.next() {
        return Err(format!("firep line {ln}: trailing content {line:?}"));
    }
    Ok(Presentation {
        n,
        generators,
        relations,
    })
}

/// Parses a module file, dispatching on content: a firep text block or a
/// JSON document. firep carries no field marker; it defaults to F_2.
pub fn parse_module_text(text: &str) -> Result<(Presentation, FieldChoice), ParseError> {
    if looks_like_firep(text) {
        Ok((parse_firep(text)?, FieldChoice::Prime(2)))
    } else {
        ModuleDoc::from_json(text)?.to_presentation()
    }
}

// ---------------------------------------------------------------------------
// stability documents

/// One axis of a carrier: a point `"p/q"` or an interval `["lo", hi]` with
/// `hi` a rational string or `null` for an unbounded ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CarrierAxisDoc {
    Point(String),
    Interval(Vec<Option<String>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaTermDoc {
    /// Pure point mass (eval mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<String>>,
    /// General face carrier (step mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub face: Option<Vec<CarrierAxisDoc>>,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaDoc {
    /// Per-axis outer window corners `[lo, hi]`.
    pub window: Vec<Vec<String>>,
    /// Per-axis full cell boundary lists; defaults to the window (one cell
    /// per axis). Must agree with the window extremes when both are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<Vec<String>>>,
    /// Row-major per-cell density values.
    pub values: Vec<String>,
    /// Per-axis geometric tail ratios `[below, above]`.
    pub tails: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityDoc {
    /// `"eval"` or `"step"`.
    pub mode: String,
    pub alpha: Vec<AlphaTermDoc>,
    pub beta: BetaDoc,
}

impl StabilityDoc {
    pub fn from_json(text: &str) -> Result<StabilityDoc, ParseError> {
        serde_json::from_str(text).map_err(|e| format!("stability document: {e}"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stability documents serialise")
    }

    /// Semantic phase; the resulting condition has passed the library's
    /// validation.
    pub fn to_condition(&self, n: usize) -> Result<StabilityCondition, Failure> {
        let beta = self.beta_spec(n)?;
        let alpha = match self.mode.as_str() {
            "eval" => {
                let mut terms = Vec::with_capacity(self.alpha.len());
                for (i, t) in self.alpha.iter().enumerate() {
                    let Some(point) = &t.point else {
                        return Err(Failure::Parse(format!(
                            "stability document: eval term {i} needs a \"point\""
                        )));
                    };
                    if t.face.is_some() {
                        return Err(Failure::Parse(format!(
                            "stability document: eval term {i} cannot carry a \"face\""
                        )));
                    }
                    if point.len() != n {
                        return Err(Failure::Parse(format!(
                            "stability document: eval term {i} has {} coordinates, expected {n}",
                            point.len()
                        )));
                    }
                    terms.push((
                        parse_point(point, &format!("eval term {i}")).map_err(Failure::Parse)?,
                        parse_rat(&t.coeff).map_err(|e| {
                            Failure::Parse(format!("eval term {i}: bad coefficient: {e}"))
                        })?,
                    ));
                }
                AlphaSpec::Eval(terms)
            }
            "step" => {
                let mut terms = Vec::with_capacity(self.alpha.len());
                for (i, t) in self.alpha.iter().enumerate() {
                    let coeff = parse_rat(&t.coeff).map_err(|e| {
                        Failure::Parse(format!("step term {i}: bad coefficient: {e}"))
                    })?;
                    let carrier = match (&t.point, &t.face) {
                        (Some(_), Some(_)) => {
                            return Err(Failure::Parse(format!(
                                "stability document: step term {i} has both \"point\" and \"face\""
                            )))
                        }
                        (Some(point), None) => point
                            .iter()
                            .map(|s| {
                                parse_rat(s).map(CarrierAxis::Point).map_err(|e| {
                                    Failure::Parse(format!("step term {i}: bad rational: {e}"))
                                })
                            })
                            .collect::<Result<Vec<_>, _>>()?,
                        (None, Some(face)) => face
                            .iter()
                            .map(|axis| Self::parse_axis(axis, i))
                            .collect::<Result<Vec<_>, _>>()?,
                        (None, None) => {
                            return Err(Failure::Parse(format!(
                                "stability document: step term {i} needs a \"point\" or \"face\""
                            )))
                        }
                    };
                    if carrier.len() != n {
                        return Err(Failure::Parse(format!(
                            "stability document: step term {i} has {} axes, expected {n}",
                            carrier.len()
                        )));
                    }
                    terms.push(AlphaTerm { carrier, coeff });
                }
                AlphaSpec::Step(terms)
            }
            other => {
                return Err(Failure::Parse(format!(
                    "stability document: unknown mode {other:?} (use \"eval\" or \"step\")"
                )))
            }
        };
        StabilityCondition::new(n, alpha, beta, SignPolicy::Engine).map_err(Failure::Lib)
    }

    fn parse_axis(axis: &CarrierAxisDoc, term: usize) -> Result<CarrierAxis, Failure> {
        match axis {
            CarrierAxisDoc::Point(s) => parse_rat(s)
                .map(CarrierAxis::Point)
                .map_err(|e| Failure::Parse(format!("step term {term}: bad rational: {e}"))),
            CarrierAxisDoc::Interval(pair) => {
                let [Some(lo), hi] = &pair[..] else {
                    return Err(Failure::Parse(format!(
                        "step term {term}: an interval axis is [\"lo\", hi] with a rational lo"
                    )));
                };
                let lo = parse_rat(lo)
                    .map_err(|e| Failure::Parse(format!("step term {term}: bad rational: {e}")))?;
                let hi = hi
                    .as_ref()
                    .map(|s| {
                        parse_rat(s).map_err(|e| {
                            Failure::Parse(format!("step term {term}: bad rational: {e}"))
                        })
                    })
                    .transpose()?;
                Ok(CarrierAxis::Interval(lo, hi))
            }
        }
    }

    fn beta_spec(&self, n: usize) -> Result<BetaSpec, Failure> {
        if self.beta.window.len() != n {
            return Err(Failure::Parse(format!(
                "stability document: beta window has {} axes, expected {n}",
                self.beta.window.len()
            )));
        }
        let mut window = Vec::with_capacity(n);
        for (i, w) in self.beta.window.iter().enumerate() {
            if w.len() != 2 {
                return Err(Failure::Parse(format!(
                    "stability document: beta window axis {i} is [lo, hi]"
                )));
            }
            window.push(parse_point(w, &format!("beta window axis {i}")).map_err(Failure::Parse)?);
        }
        let bounds: Vec<Vec<Rat>> = match &self.beta.grid {
            None => window,
            Some(grid) => {
                if grid.len() != n {
                    return Err(Failure::Parse(format!(
                        "stability document: beta grid has {} axes, expected {n}",
                        grid.len()
                    )));
                }
                let mut bounds = Vec::with_capacity(n);
                for (i, axis) in grid.iter().enumerate() {
                    let parsed =
                        parse_point(axis, &format!("beta grid axis {i}")).map_err(Failure::Parse)?;
                    if parsed.first() != window[i].first() || parsed.last() != window[i].last() {
                        return Err(Failure::Parse(format!(
                            "stability document: beta grid axis {i} does not span the window"
                        )));
                    }
                    bounds.push(parsed);
                }
                bounds
            }
        };
        if self.beta.tails.len() != n {
            return Err(Failure::Parse(format!(
                "stability document: beta tails have {} axes, expected {n}",
                self.beta.tails.len()
            )));
        }
        let mut tails = Vec::with_capacity(n);
        for (i, t) in self.beta.tails.iter().enumerate() {
            if t.len() != 2 {
                return Err(Failure::Parse(format!(
                    "stability document: beta tail axis {i} is [below, above]"
                )));
            }
            let pair = parse_point(t, &format!("beta tail axis {i}")).map_err(Failure::Parse)?;
            tails.push((pair[0].clone(), pair[1].clone()));
        }
        let values = parse_point(&self.beta.values, "beta values").map_err(Failure::Parse)?;
        BetaSpec::new(bounds, values, tails).map_err(Failure::Lib)
    }

    pub fn from_condition(z: &StabilityCondition) -> StabilityDoc {
        let beta = z.beta();
        let (mode, alpha) = match z.alpha() {
            AlphaSpec::Eval(terms) => (
                "eval",
                terms
                    .iter()
                    .map(|(q, c)| AlphaTermDoc {
                        point: Some(q.iter().map(format_rat).collect()),
                        face: None,
                        coeff: format_rat(c),
                    })
                    .collect(),
            ),
            AlphaSpec::Step(terms) => (
                "step",
                terms
                    .iter()
                    .map(|t| AlphaTermDoc {
                        point: None,
                        face: Some(
                            t.carrier
                                .iter()
                                .map(|axis| match axis {
                                    CarrierAxis::Point(q) => CarrierAxisDoc::Point(format_rat(q)),
                                    CarrierAxis::Interval(lo, hi) => CarrierAxisDoc::Interval(
                                        vec![Some(format_rat(lo)), hi.as_ref().map(format_rat)],
                                    ),
                                })
                                .collect(),
                        ),
                        coeff: format_rat(&t.coeff),
                    })
                    .collect(),
            ),
        };
        StabilityDoc {
            mode: mode.to_string(),
            alpha,
            beta: BetaDoc {
                window: beta
                    .bounds()
                    .iter()
                    .map(|b| {
                        vec![
                            format_rat(&b[0]),
                            format_rat(b.last().expect("axis bounds are nonempty")),
                        ]
                    })
                    .collect(),
                grid: Some(
                    beta.bounds()
                        .iter()
                        .map(|b| b.iter().map(format_rat).collect())
                        .collect(),
                ),
                values: beta.values().iter().map(format_rat).collect(),
                tails: beta
                    .tails()
                    .iter()
                    .map(|(lo, hi)| vec![format_rat(lo), format_rat(hi)])
                    .collect(),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// failure classification

/// What went wrong, for exit-code mapping: syntax errors (the file does not
/// match the format) versus library errors (validation, budget, internal
/// invariants).
#[derive(Debug)]
pub enum Failure {
    Parse(ParseError),
    Lib(hnpers::Error),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Parse(msg) => write!(f, "parse error: {msg}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<hnpers::Error> for Failure {
    fn from(e: hnpers::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    /// Exit codes: 2 parse, 3 validation, 4 budget, 5 invariant violation.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Lib(hnpers::Error::BudgetExceeded { .. }) => 4,
            Failure::Lib(hnpers::Error::InvariantViolation { .. }) => 5,
            Failure::Lib(_) => 3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hnpers::scalar::rat_int;

    #[test]
    fn module_documents_round_trip() {
        let text = r#"{
            "n": 2,
            "field": {"prime": 2},
            "generators": [["0", "0"], ["1/2", "0"]],
            "relations": [{"point": ["1", "1"], "coeffs": ["1", "1"]}]
        }"#;
        let doc = ModuleDoc::from_json(text).unwrap();
        let (pres, field) = doc.to_presentation().unwrap();
        assert_eq!(field, FieldChoice::Prime(2));
        assert_eq!(pres.n, 2);
        let emitted = ModuleDoc::from_presentation(&pres, field);
        let (pres2, field2) = ModuleDoc::from_json(&emitted.to_json())
            .unwrap()
            .to_presentation()
            .unwrap();
        assert_eq!(pres, pres2);
        assert_eq!(field, field2);
    }

    #[test]
    fn firep_blocks_parse_and_reject_deviations() {
        let text = "# a comment\nfirep 2\n2\n1\n0 0\n1/2 0\n1 1 ; 1 1\n";
        let p = parse_firep(text).unwrap();
        assert_eq!(p.n, 2);
        assert_eq!(p.generators.len(), 2);
        assert_eq!(p.relations.len(), 1);
        assert_eq!(p.relations[0].position, vec![rat_int(1), rat_int(1)]);

        for bad in [
            "firep\n1\n0\n0\n",                 // missing parameter count
            "firep 2\n1\n1\n0 0\n1 1 ; 1 1\nx", // trailing content
            "firep 2\n1\n1\n0 0 0\n1 1 ; 1\n",  // wrong arity
            "firep 2\n1\n1\n0 0\n1 1 1\n",      // relation without ";"
        ] {
            assert!(parse_firep(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn stability_documents_round_trip_both_modes() {
        for text in [
            r#"{
                "mode": "eval",
                "alpha": [{"point": ["0"], "coeff": "1"}],
                "beta": {"window": [["0", "1"]], "values": ["1"], "tails": [["1/2", "1/2"]]}
            }"#,
            r#"{
                "mode": "step",
                "alpha": [{"face": [["0", "1"], "1/2"], "coeff": "2"}],
                "beta": {
                    "window": [["0", "2"], ["0", "2"]],
                    "grid": [["0", "1", "2"], ["0", "2"]],
                    "values": ["1", "1/2"],
                    "tails": [["1/2", "1/3"], ["1/2", "1/2"]]
                }
            }"#,
        ] {
            let doc = StabilityDoc::from_json(text).unwrap();
            let n = doc.beta.window.len();
            let z = doc.to_condition(n).unwrap();
            let emitted = StabilityDoc::from_condition(&z);
            let z2 = StabilityDoc::from_json(&emitted.to_json())
                .unwrap()
                .to_condition(n)
                .unwrap();
            assert_eq!(z, z2);
        }
    }

    #[test]
    fn failures_map_to_distinct_exit_codes() {
        assert_eq!(Failure::Parse("x".into()).exit_code(), 2);
        assert_eq!(
            Failure::Lib(hnpers::Error::BudgetExceeded {
                op: "t",
                detail: String::new()
            })
            .exit_code(),
            4
        );
        assert_eq!(
            Failure::Lib(hnpers::Error::InvariantViolation {
                op: "t",
                detail: String::new()
            })
            .exit_code(),
            5
        );
        assert_eq!(
            Failure::Lib(hnpers::Error::ZeroSlope).exit_code(),
            3
        );
    }
}
