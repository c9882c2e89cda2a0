//! Semifree dg presentations over polynomial rings: Koszul algebras, their
//! tower maps and Čech (Amitsur) stages.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::One;

use crate::error::{ParseError, StructureError};
use crate::gca::{Algebra, Element, Exps, Generator};
use crate::groebner::{buchberger, GroebnerBasis, MonomialOrder};
use crate::parse::{parse_expr, parse_poly};
use crate::poly::{MinDegree, Monomial, Poly, VarContext};

/// A generator beyond the polynomial variables: negative internal degree,
/// positive weight. Odd degrees give exterior generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtraGenerator {
    pub name: String,
    pub degree: i32,
    pub weight: u32,
}

#[derive(Clone, Debug)]
pub struct DGPresentation {
    vars: VarContext,
    extra: Vec<ExtraGenerator>,
    algebra: Algebra,
    images: Vec<Element>,
    relations: Vec<Poly>,
    relation_gb: Option<GroebnerBasis>,
}

impl PartialEq for DGPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.extra == other.extra && self.images == other.images && self.relations == other.relations
    }
}

impl DGPresentation {
    /// `differential[i]` is the boundary of `extra[i]`, as an element of the
    /// algebra on `vars` followed by `extra`.
    pub fn new(
        vars: &VarContext,
        extra: Vec<ExtraGenerator>,
        differential: Vec<Element>,
    ) -> Result<Self, StructureError> {
        if differential.len() != extra.len() {
            let missing = extra.get(differential.len()).map_or_else(String::new, |g| g.name.clone());
            return Err(StructureError::MissingDifferential(missing));
        }
        let mut seen = std::collections::HashSet::new();
        for name in vars.names().iter().chain(extra.iter().map(|g| &g.name)) {
            if !seen.insert(name.clone()) {
                return Err(StructureError::DuplicateGenerator(name.clone()));
            }
        }
        for g in &extra {
            if g.degree >= 0 {
                return Err(StructureError::InvalidArgument(format!(
                    "generator `{}` must have negative degree, got {}",
                    g.name, g.degree
                )));
            }
        }
        let algebra = Self::algebra_for(vars, &extra);
        let nv = vars.len();
        for (i, (g, d)) in extra.iter().zip(&differential).enumerate() {
            for (m, _) in d.terms() {
                let found = algebra.degree(m);
                if found != g.degree + 1 {
                    return Err(StructureError::DifferentialDegree { generator: g.name.clone(), expected: g.degree + 1, found });
                }
            }
            debug_assert_eq!(algebra.generators()[nv + i].name, g.name);
        }
        let mut images = vec![Element::zero(); nv];
        images.extend(differential);
        Ok(DGPresentation { vars: vars.clone(), extra, algebra, images, relations: Vec::new(), relation_gb: None })
    }

    fn algebra_for(vars: &VarContext, extra: &[ExtraGenerator]) -> Algebra {
        let mut gens: Vec<Generator> = vars.names().iter().map(|n| Generator::new(n.clone(), 0, 0, 1)).collect();
        gens.extend(extra.iter().map(|g| Generator::new(g.name.clone(), g.degree, 0, g.weight)));
        Algebra::new(gens)
    }

    /// Adds ambient relations on the polynomial variables. They must be
    /// homogeneous so that reduction preserves weight.
    pub fn with_relations(mut self, relations: Vec<Poly>) -> Result<Self, StructureError> {
        for r in &relations {
            if r.vars() != &self.vars {
                return Err(crate::error::PolyError::ContextMismatch {
                    left: self.vars.names().join(","),
                    right: r.vars().names().join(","),
                }
                .into());
            }
            if !r.is_homogeneous() {
                return Err(StructureError::InhomogeneousRelation(r.to_string()));
            }
        }
        let relations: Vec<Poly> = relations.into_iter().filter(|r| !r.is_zero()).collect();
        self.relation_gb = if relations.is_empty() {
            None
        } else {
            Some(buchberger(&relations, &self.vars, &MonomialOrder::grevlex(self.vars.len()))?)
        };
        self.relations = relations;
        Ok(self)
    }

    pub fn vars(&self) -> &VarContext {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn extra(&self) -> &[ExtraGenerator] {
        &self.extra
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn relations(&self) -> &[Poly] {
        &self.relations
    }

    pub fn has_relations(&self) -> bool {
        self.relation_gb.is_some()
    }

    /// Boundary of each algebra generator (zero on polynomial variables).
    pub fn differential_images(&self) -> &[Element] {
        &self.images
    }

    pub fn boundary(&self, name: &str) -> Option<&Element> {
        self.algebra.index_of(name).map(|i| &self.images[i])
    }

    pub fn differential(&self, x: &Element) -> Element {
        self.reduce(&self.algebra.derive(&self.images, true, x))
    }

    /// Embeds a polynomial in the variables into the algebra.
    pub fn embed(&self, p: &Poly) -> Element {
        embed_poly(p, self.algebra.len())
    }

    /// Normal form of the polynomial-variable part modulo the relations.
    pub fn reduce(&self, x: &Element) -> Element {
        let Some(gb) = &self.relation_gb else { return x.clone() };
        let nv = self.nvars();
        let mut groups: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
        for (m, c) in x.terms() {
            let p = groups.entry(m[nv..].to_vec()).or_insert_with(|| Poly::zero(&self.vars));
            p.add_term(Monomial::from_exponents(m[..nv].to_vec()), c.clone());
        }
        let mut out = Element::zero();
        for (tail, p) in groups {
            for (mono, c) in gb.normal_form(&p).terms() {
                let mut m: Exps = (0..nv).map(|i| mono.exponent(i)).collect();
                m.extend_from_slice(&tail);
                out.add_term(m, c.clone());
            }
        }
        out
    }

    /// True when the polynomial-variable part of `m` is a standard monomial.
    pub fn is_standard(&self, m: &[u32]) -> bool {
        match &self.relation_gb {
            None => true,
            Some(gb) => gb.is_standard(&Monomial::from_exponents(m[..self.nvars()].to_vec())),
        }
    }

    pub fn parse_element(&self, text: &str) -> Result<Element, ParseError> {
        Ok(self.reduce(&parse_expr(text)?.eval(&self.algebra)?))
    }

    pub fn display(&self, x: &Element) -> String {
        self.algebra.display(x)
    }

    /// Same presentation with the extra generators listed in the given order.
    pub fn permute_extra(&self, order: &[usize]) -> Result<Self, StructureError> {
        let nv = self.nvars();
        let extra: Vec<ExtraGenerator> = order.iter().map(|&i| self.extra[i].clone()).collect();
        let target = Self::algebra_for(&self.vars, &extra);
        // reordering odd factors changes signs, so translate through products
        let translate = |x: &Element| -> Element {
            let mut out = Element::zero();
            for (m, c) in x.terms() {
                let mut acc = target.one();
                for (i, &e) in m.iter().enumerate() {
                    for _ in 0..e {
                        let j = if i < nv { i } else { nv + order.iter().position(|&o| o == i - nv).expect("perm") };
                        acc = target.mul(&acc, &target.generator(j));
                    }
                }
                out.add_scaled(&acc, c);
            }
            out
        };
        let differential = order.iter().map(|&i| translate(&self.images[nv + i])).collect();
        DGPresentation::new(&self.vars, extra, differential)?.with_relations(self.relations.clone())
    }

    /// Interchange text: `vars`, `odd`, `d` and `relation` lines.
    pub fn to_interchange(&self) -> String {
        let mut s = String::new();
        writeln!(s, "vars {}", self.vars.names().join(" ")).expect("write");
        for g in &self.extra {
            writeln!(s, "odd {} deg {} weight {}", g.name, g.degree, g.weight).expect("write");
        }
        let nv = self.nvars();
        for (i, g) in self.extra.iter().enumerate() {
            writeln!(s, "d {} = {}", g.name, self.display(&self.images[nv + i])).expect("write");
        }
        for r in &self.relations {
            writeln!(s, "relation {r}").expect("write");
        }
        s
    }
}

pub(crate) fn embed_poly(p: &Poly, len: usize) -> Element {
    let mut out = Element::zero();
    for (m, c) in p.terms() {
        let mut e = vec![0; len];
        for (i, &x) in m.exponents().iter().enumerate() {
            e[i] = x;
        }
        out.add_term(e, c.clone());
    }
    out
}

/// Multiplicative map of presentations given on generators.
#[derive(Clone, Debug)]
pub struct DGMorphism {
    pub source: DGPresentation,
    pub target: DGPresentation,
    pub images: Vec<Element>,
}

impl DGMorphism {
    pub fn identity(p: &DGPresentation) -> Self {
        let images = (0..p.algebra().len()).map(|i| p.algebra().generator(i)).collect();
        DGMorphism { source: p.clone(), target: p.clone(), images }
    }

    pub fn apply(&self, x: &Element) -> Element {
        let t = self.target.algebra();
        let mut out = Element::zero();
        for (m, c) in x.terms() {
            let mut acc = t.one();
            for (i, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    acc = t.mul(&acc, &self.images[i]);
                }
            }
            out.add_scaled(&acc, c);
        }
        self.target.reduce(&out)
    }

    /// `φ(∂g) = ∂φ(g)` on every source generator.
    pub fn commutes_with_differential(&self) -> bool {
        (0..self.source.algebra().len()).all(|i| {
            let g = self.source.algebra().generator(i);
            self.apply(&self.source.differential(&g)) == self.target.differential(&self.apply(&g))
        })
    }

    /// First generator whose image has a term of smaller weight.
    pub fn weight_violation(&self) -> Option<String> {
        let (s, t) = (self.source.algebra(), self.target.algebra());
        s.generators().iter().zip(&self.images).find_map(|(g, img)| {
            img.terms().any(|(m, _)| t.weight(m) < g.weight).then(|| g.name.clone())
        })
    }

    pub fn compose(&self, after: &DGMorphism) -> DGMorphism {
        let images = self.images.iter().map(|x| after.apply(x)).collect();
        DGMorphism { source: self.source.clone(), target: after.target.clone(), images }
    }
}

fn min_degree_weight(f: &Poly) -> Result<u32, StructureError> {
    match f.min_degree() {
        MinDegree::Finite(d) => Ok(d),
        MinDegree::Infinite => Err(StructureError::ZeroGenerator),
    }
}

fn koszul_names(count: usize) -> Vec<String> {
    if count == 1 {
        vec!["t".to_string()]
    } else {
        (1..=count).map(|i| format!("t{i}")).collect()
    }
}

/// `K_n(A, S)`: one odd generator `t_i` of degree -1 per `f_i`, with
/// `∂t_i = f_i^n` and weight `n·min_degree(f_i)`.
pub fn koszul_presentation(vars: &VarContext, s: &[Poly], n: u32) -> Result<DGPresentation, StructureError> {
    if n == 0 {
        return Err(StructureError::InvalidArgument("Koszul stage n must be >= 1".into()));
    }
    if s.is_empty() {
        return Err(StructureError::InvalidArgument("need at least one element".into()));
    }
    let names = koszul_names(s.len());
    let mut extra = Vec::new();
    let mut diff = Vec::new();
    for (f, name) in s.iter().zip(names) {
        let w = min_degree_weight(f)?;
        extra.push(ExtraGenerator { name, degree: -1, weight: n * w });
        diff.push(embed_poly(&f.pow(n), vars.len() + s.len()));
    }
    DGPresentation::new(vars, extra, diff)
}

/// Koszul presentation over `ℚ[vars]/(relations)`.
pub fn koszul_over_quotient(
    vars: &VarContext,
    relations: &[Poly],
    s: &[Poly],
    n: u32,
) -> Result<DGPresentation, StructureError> {
    koszul_presentation(vars, s, n)?.with_relations(relations.to_vec())
}

/// `K_N → K_n`, `t_{i,N} ↦ f_i^(N-n)·t_{i,n}`.
pub fn tower_map(vars: &VarContext, s: &[Poly], big: u32, small: u32) -> Result<DGMorphism, StructureError> {
    tower_map_over_quotient(vars, &[], s, big, small)
}

pub fn tower_map_over_quotient(
    vars: &VarContext,
    relations: &[Poly],
    s: &[Poly],
    big: u32,
    small: u32,
) -> Result<DGMorphism, StructureError> {
    if small == 0 || big < small {
        return Err(StructureError::TowerOrder { big, small });
    }
    let source = koszul_over_quotient(vars, relations, s, big)?;
    let target = koszul_over_quotient(vars, relations, s, small)?;
    let a = target.algebra();
    let nv = vars.len();
    let mut images: Vec<Element> = (0..nv).map(|i| a.generator(i)).collect();
    for (i, f) in s.iter().enumerate() {
        let coeff = target.embed(&f.pow(big - small));
        images.push(target.reduce(&a.mul(&coeff, &a.generator(nv + i))));
    }
    Ok(DGMorphism { source, target, images })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub passed: bool,
    pub failure: Option<String>,
}

impl CheckReport {
    fn pass() -> Self {
        CheckReport { passed: true, failure: None }
    }

    fn fail(msg: String) -> Self {
        CheckReport { passed: false, failure: Some(msg) }
    }
}

/// Checks `∂² = 0` on generators, the graded sign rule on all generator
/// pairs and weight monotonicity of `∂`.
pub fn presentation_check(p: &DGPresentation) -> CheckReport {
    let a = p.algebra();
    for (i, g) in a.generators().iter().enumerate() {
        let dd = p.differential(&p.differential(&a.generator(i)));
        if !dd.is_zero() {
            return CheckReport::fail(format!("d^2 {} = {} != 0", g.name, p.display(&dd)));
        }
    }
    for i in 0..a.len() {
        for j in 0..a.len() {
            let (u, v) = (a.generator(i), a.generator(j));
            let uv = a.mul(&u, &v);
            let vu = a.mul(&v, &u);
            let odd = a.generators()[i].is_odd() && a.generators()[j].is_odd();
            let expected = if odd { vu.neg() } else { vu };
            if uv != expected {
                return CheckReport::fail(format!(
                    "sign rule fails for {}*{}",
                    a.generators()[i].name,
                    a.generators()[j].name
                ));
            }
        }
    }
    for (i, g) in a.generators().iter().enumerate() {
        if !g.is_odd() && g.weight == 0 {
            return CheckReport::fail(format!("even generator {} has weight 0", g.name));
        }
        if let Some((m, _)) = p.differential_images()[i].terms().find(|(m, _)| a.weight(m) < g.weight) {
            return CheckReport::fail(format!(
                "d {} has a term of weight {} below the generator weight {}",
                g.name,
                a.weight(m),
                g.weight
            ));
        }
    }
    CheckReport::pass()
}

/// Level `p` of the Čech conerve of `A → A/(f)`, presented by `p + 1`
/// odd generators `xi0..xip` all bounding `f`.
#[derive(Clone, Debug)]
pub struct AmitsurStage {
    pub f: Poly,
    pub level: usize,
    pub presentation: DGPresentation,
    /// `cofaces[j]` is `d^j` from level `p - 1`; empty at level 0.
    pub cofaces: Vec<DGMorphism>,
}

fn amitsur_presentation(vars: &VarContext, f: &Poly, p: usize) -> Result<DGPresentation, StructureError> {
    let w = min_degree_weight(f)?;
    let len = vars.len() + p + 1;
    let extra = (0..=p).map(|j| ExtraGenerator { name: format!("xi{j}"), degree: -1, weight: w }).collect();
    let diff = (0..=p).map(|_| embed_poly(f, len)).collect();
    DGPresentation::new(vars, extra, diff)
}

/// Coface `d^j` from level `p - 1` to level `p`: skips index `j`.
pub fn amitsur_coface(source: &DGPresentation, target: &DGPresentation, j: usize) -> DGMorphism {
    let nv = source.nvars();
    let a = target.algebra();
    let images = (0..source.algebra().len())
        .map(|i| {
            if i < nv {
                a.generator(i)
            } else {
                let k = i - nv;
                a.generator(nv + if k < j { k } else { k + 1 })
            }
        })
        .collect();
    DGMorphism { source: source.clone(), target: target.clone(), images }
}

pub fn amitsur_stage(vars: &VarContext, f: &Poly, p: usize) -> Result<AmitsurStage, StructureError> {
    if f.is_zero() {
        return Err(StructureError::ZeroGenerator);
    }
    let presentation = amitsur_presentation(vars, f, p)?;
    let cofaces = if p == 0 {
        Vec::new()
    } else {
        let prev = amitsur_presentation(vars, f, p - 1)?;
        (0..=p).map(|j| amitsur_coface(&prev, &presentation, j)).collect()
    };
    Ok(AmitsurStage { f: f.clone(), level: p, presentation, cofaces })
}

/// A parsed presentation file with its optional directives.
#[derive(Clone, Debug)]
pub struct PresentationFile {
    pub presentation: DGPresentation,
    pub truncate: Option<u32>,
    pub hodge: Option<u32>,
}

fn word_column(line: &str, word_index: usize) -> usize {
    let mut count = 0;
    let mut in_word = false;
    for (i, c) in line.chars().enumerate() {
        if !c.is_whitespace() && !in_word {
            if count == word_index {
                return i + 1;
            }
            count += 1;
        }
        in_word = !c.is_whitespace();
    }
    line.chars().count() + 1
}

/// Parses the line-oriented presentation format:
///
/// ```text
/// vars x y
/// odd t deg -1 weight 4
/// d t = x^4 + y^5 + y^4*x
/// relation x*y
/// truncate 6
/// hodge 3
/// ```
pub fn parse_presentation(text: &str) -> Result<PresentationFile, ParseError> {
    let mut vars: Option<VarContext> = None;
    let mut extra: Vec<(ExtraGenerator, usize)> = Vec::new();
    let mut diffs: BTreeMap<String, (String, usize, usize)> = BTreeMap::new();
    let mut relations: Vec<(String, usize, usize)> = Vec::new();
    let mut truncate = None;
    let mut hodge = None;
    let parse_u32 = |word: Option<&str>, line: &str, idx: usize, ln: usize, what: &str| -> Result<u32, ParseError> {
        word.and_then(|w| w.parse().ok())
            .ok_or_else(|| ParseError::at(word_column(line, idx), format!("expected a non-negative integer {what}")).on_line(ln))
    };
    for (ln0, raw) in text.lines().enumerate() {
        let ln = ln0 + 1;
        let line = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some(&head) = words.first() else { continue };
        match head {
            "vars" => {
                if vars.is_some() {
                    return Err(ParseError::at(word_column(line, 0), "duplicate `vars` line").on_line(ln));
                }
                vars = Some(VarContext::new(words[1..].iter().copied()));
            }
            "odd" => {
                let name = words.get(1).ok_or_else(|| ParseError::at(line.len() + 1, "expected a generator name").on_line(ln))?;
                if words.get(2) != Some(&"deg") {
                    return Err(ParseError::at(word_column(line, 2), "expected `deg`").on_line(ln));
                }
                let degree: i32 = words
                    .get(3)
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| ParseError::at(word_column(line, 3), "expected an integer degree").on_line(ln))?;
                if words.get(4) != Some(&"weight") {
                    return Err(ParseError::at(word_column(line, 4), "expected `weight`").on_line(ln));
                }
                let weight = parse_u32(words.get(5).copied(), line, 5, ln, "weight")?;
                if words.len() > 6 {
                    return Err(ParseError::at(word_column(line, 6), "unexpected trailing input").on_line(ln));
                }
                extra.push((ExtraGenerator { name: name.to_string(), degree, weight }, ln));
            }
            "d" => {
                let eq = line.find('=').ok_or_else(|| ParseError::at(word_column(line, 1), "expected `d <name> = <expr>`").on_line(ln))?;
                let name = line[..eq].split_whitespace().nth(1).ok_or_else(|| ParseError::at(eq + 1, "missing generator name").on_line(ln))?;
                let offset = line[..=eq].chars().count();
                if diffs.insert(name.to_string(), (line[eq + 1..].to_string(), ln, offset)).is_some() {
                    return Err(ParseError::at(word_column(line, 1), format!("second `d` line for `{name}`")).on_line(ln));
                }
            }
            "relation" => {
                let start = line.find("relation").expect("head") + "relation".len();
                relations.push((line[start..].to_string(), ln, line[..start].chars().count()));
            }
            "truncate" => truncate = Some(parse_u32(words.get(1).copied(), line, 1, ln, "weight bound")?),
            "hodge" => hodge = Some(parse_u32(words.get(1).copied(), line, 1, ln, "Hodge level")?),
            other => {
                return Err(ParseError::at(word_column(line, 0), format!("unknown directive `{other}`")).on_line(ln));
            }
        }
    }
    let vars = vars.ok_or_else(|| ParseError::at(1, "missing `vars` line").on_line(1))?;
    let algebra = DGPresentation::algebra_for(&vars, &extra.iter().map(|(g, _)| g.clone()).collect::<Vec<_>>());
    let mut differential = Vec::new();
    for (g, ln) in &extra {
        let (expr, dl, offset) =
            diffs.remove(&g.name).ok_or_else(|| ParseError::at(1, format!("no `d` line for `{}`", g.name)).on_line(*ln))?;
        let e = parse_expr(&expr)
            .and_then(|e| e.eval(&algebra))
            .map_err(|e| ParseError::at(e.column + offset, e.message).on_line(dl))?;
        differential.push(e);
    }
    if let Some((name, (_, dl, _))) = diffs.into_iter().next() {
        return Err(ParseError::at(1, format!("`d` line for undeclared generator `{name}`")).on_line(dl));
    }
    let mut rels = Vec::new();
    for (text, ln, offset) in relations {
        rels.push(parse_poly(&text, &vars).map_err(|e| ParseError::at(e.column + offset, e.message).on_line(ln))?);
    }
    let presentation = DGPresentation::new(&vars, extra.into_iter().map(|(g, _)| g).collect(), differential)
        .and_then(|p| p.with_relations(rels))
        .map_err(|e| ParseError::at(1, e.to_string()))?;
    Ok(PresentationFile { presentation, truncate, hodge })
}

/// Polynomial ring with no extra generators.
pub fn free_presentation(vars: &VarContext) -> DGPresentation {
    DGPresentation::new(vars, Vec::new(), Vec::new()).expect("no generators to check")
}

/// Adjoins a fresh even variable `u` of weight 1 to the polynomial variables.
pub fn adjoin_variable(p: &DGPresentation, name: &str) -> Result<DGPresentation, StructureError> {
    if p.algebra().index_of(name).is_some() {
        return Err(StructureError::DuplicateGenerator(name.to_string()));
    }
    let nv = p.nvars();
    let mut names: Vec<String> = p.vars().names().to_vec();
    names.push(name.to_string());
    let vars = VarContext::new(names);
    let map = |m: &Exps| -> Exps {
        let mut out = m[..nv].to_vec();
        out.push(0);
        out.extend_from_slice(&m[nv..]);
        out
    };
    let differential = p.differential_images()[nv..].iter().map(|d| d.map_monomials(map)).collect();
    let shift: Vec<usize> = (0..nv).collect();
    let relations = p.relations().iter().map(|r| r.remap(&vars, &shift)).collect();
    DGPresentation::new(&vars, p.extra().to_vec(), differential)?.with_relations(relations)
}

pub fn is_unit(x: &Element, a: &Algebra) -> bool {
    x.num_terms() == 1 && x.coefficient(&a.unit_exps()).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v1() -> VarContext {
        VarContext::new(["x"])
    }

    fn v2() -> VarContext {
        VarContext::new(["x", "y"])
    }

    fn p(s: &str, v: &VarContext) -> Poly {
        parse_poly(s, v).unwrap()
    }

    #[test]
    fn koszul_examples() {
        let k = koszul_presentation(&v1(), &[p("x", &v1())], 2).unwrap();
        assert_eq!(k.display(k.boundary("t").unwrap()), "x^2");
        assert_eq!(k.extra()[0].weight, 2);
        let k = koszul_presentation(&v2(), &[p("x", &v2()), p("y", &v2())], 1).unwrap();
        assert_eq!(k.display(k.boundary("t1").unwrap()), "x");
        assert_eq!(k.display(k.boundary("t2").unwrap()), "y");
        let r = koszul_presentation(&v2(), &[p("x^4 + y^5 + y^4*x", &v2())], 1).unwrap();
        assert_eq!(r.extra()[0].weight, 4);
        assert!(presentation_check(&r).passed);
        assert_eq!(koszul_presentation(&v1(), &[Poly::zero(&v1())], 1).unwrap_err(), StructureError::ZeroGenerator);
    }

    #[test]
    fn tower_maps() {
        let s = [p("x", &v1())];
        let m = tower_map(&v1(), &s, 3, 1).unwrap();
        assert_eq!(m.target.display(&m.images[1]), "x^2*t");
        assert!(m.commutes_with_differential());
        assert!(m.weight_violation().is_none());
        let id = tower_map(&v1(), &s, 2, 2).unwrap();
        assert_eq!(id.target.display(&id.images[1]), "t");
        let s2 = [p("x", &v2()), p("y", &v2())];
        let m = tower_map(&v2(), &s2, 2, 1).unwrap();
        assert_eq!(m.target.display(&m.images[2]), "x*t1");
        assert_eq!(m.target.display(&m.images[3]), "y*t2");
        assert_eq!(tower_map(&v1(), &s, 1, 2).unwrap_err(), StructureError::TowerOrder { big: 1, small: 2 });
    }

    #[test]
    fn tower_maps_compose() {
        let cases: Vec<(VarContext, Vec<&str>)> =
            vec![(v1(), vec!["x"]), (v1(), vec!["x^2"]), (v2(), vec!["x", "y"])];
        for (v, gens) in cases {
            let s: Vec<Poly> = gens.iter().map(|g| p(g, &v)).collect();
            for big_m in 1..=4 {
                for big_n in 1..=big_m {
                    for n in 1..=big_n {
                        let first = tower_map(&v, &s, big_m, big_n).unwrap();
                        let second = tower_map(&v, &s, big_n, n).unwrap();
                        let direct = tower_map(&v, &s, big_m, n).unwrap();
                        assert_eq!(first.compose(&second).images, direct.images);
                    }
                }
            }
        }
    }

    #[test]
    fn corrupted_presentation_fails() {
        let v = v1();
        let extra = vec![
            ExtraGenerator { name: "t".into(), degree: -1, weight: 1 },
            ExtraGenerator { name: "u".into(), degree: -2, weight: 1 },
        ];
        let a = DGPresentation::algebra_for(&v, &extra);
        let diff = vec![a.generator(0), a.generator(1)];
        let bad = DGPresentation::new(&v, extra, diff).unwrap();
        let r = presentation_check(&bad);
        assert!(!r.passed);
        assert!(r.failure.unwrap().contains("d^2 u"));
        let good = koszul_presentation(&v, &[p("x", &v)], 1).unwrap();
        assert!(presentation_check(&good).passed);
    }

    #[test]
    fn degree_mismatch_rejected() {
        let v = v1();
        let extra = vec![ExtraGenerator { name: "t".into(), degree: -1, weight: 1 }];
        let a = DGPresentation::algebra_for(&v, &extra);
        let err = DGPresentation::new(&v, extra, vec![a.generator(1)]).unwrap_err();
        assert!(matches!(err, StructureError::DifferentialDegree { .. }));
    }

    #[test]
    fn amitsur_cosimplicial_identities() {
        let v = v1();
        let f = p("x^2", &v);
        let s0 = amitsur_stage(&v, &f, 0).unwrap();
        assert_eq!(s0.presentation.extra().len(), 1);
        for level in 1..=3usize {
            let up = amitsur_stage(&v, &f, level + 1).unwrap();
            let this = amitsur_stage(&v, &f, level).unwrap();
            assert!(presentation_check(&this.presentation).passed);
            for c in &this.cofaces {
                assert!(c.commutes_with_differential());
            }
            for j in 0..=level + 1 {
                for i in 0..j {
                    // d^j d^i = d^i d^(j-1) as maps from level - 1 to level + 1
                    let lhs = this.cofaces[i].compose(&up.cofaces[j]);
                    let rhs = this.cofaces[j - 1].compose(&up.cofaces[i]);
                    assert_eq!(lhs.images, rhs.images, "level {level}, i={i}, j={j}");
                }
            }
        }
        assert_eq!(amitsur_stage(&v, &Poly::zero(&v), 1).unwrap_err(), StructureError::ZeroGenerator);
    }

    #[test]
    fn relations_reduce() {
        let v = v2();
        let k = koszul_over_quotient(&v, &[p("x*y", &v)], &[p("x", &v)], 1).unwrap();
        let e = k.parse_element("x^2*y*t + y^2").unwrap();
        assert_eq!(k.display(&e), "y^2");
        let err = koszul_over_quotient(&v, &[p("x*y - 1", &v)], &[p("x", &v)], 1).unwrap_err();
        assert!(matches!(err, StructureError::InhomogeneousRelation(_)));
    }

    #[test]
    fn interchange_round_trip() {
        let text = "vars x y\nodd t deg -1 weight 4\nd t = x^4 + y^5 + y^4*x\ntruncate 5 # window\nhodge 2\n";
        let file = parse_presentation(text).unwrap();
        assert_eq!(file.truncate, Some(5));
        assert_eq!(file.hodge, Some(2));
        let printed = file.presentation.to_interchange();
        assert_eq!(printed, "vars x y\nodd t deg -1 weight 4\nd t = x*y^4 + y^5 + x^4\n");
        let again = parse_presentation(&printed).unwrap();
        assert_eq!(again.presentation, file.presentation);
    }

    #[test]
    fn interchange_errors_have_positions() {
        let e = parse_presentation("vars x\nodd t deg -1 weight 1\nd t = x^").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert_eq!(e.column, 8);
        let e = parse_presentation("vars x\nodd t deg -1 weight 1\nd t = z").unwrap_err();
        assert_eq!((e.line, e.column), (Some(3), 7));
        let e = parse_presentation("vars x\nodd t deg -1\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = parse_presentation("vars x\nodd t deg -1 weight 1\n").unwrap_err();
        assert!(e.message.contains("no `d` line"));
        let e = parse_presentation("vars x\nfoo\n").unwrap_err();
        assert_eq!((e.line, e.column), (Some(2), 1));
    }

    #[test]
    fn permuting_generators_keeps_differentials() {
        let v = v2();
        let k = koszul_presentation(&v, &[p("x", &v), p("y^2", &v)], 1).unwrap();
        let q = k.permute_extra(&[1, 0]).unwrap();
        assert_eq!(q.extra()[0].name, "t2");
        assert!(presentation_check(&q).passed);
        assert_eq!(q.display(q.boundary("t2").unwrap()), "y^2");
    }
}
