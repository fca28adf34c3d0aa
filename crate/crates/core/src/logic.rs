//! Four-valued partial models over the relation vocabulary.
//!
//! A [`PartialModel`] assigns each relation instance `r(a, b)` one of
//! [`TruthValue::False`], [`TruthValue::True`], [`TruthValue::Unknown`] or
//! [`TruthValue::Error`]. Assertions are folded in with the information
//! merge ([`TruthValue::merge`]); the validity rules then refine the model to
//! a fixpoint, and any `Error` entry left behind is a statically detected
//! inconsistency.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::mapping::RelationSemantics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TruthValue {
    False,
    True,
    Unknown,
    Error,
}

impl TruthValue {
    pub const ALL: [TruthValue; 4] = [
        TruthValue::False,
        TruthValue::True,
        TruthValue::Unknown,
        TruthValue::Error,
    ];

    /// Information merge: least upper bound in the order
    /// `Unknown < {True, False} < Error`.
    pub fn merge(self, other: TruthValue) -> TruthValue {
        use TruthValue::*;
        match (self, other) {
            (Unknown, x) | (x, Unknown) => x,
            (Error, _) | (_, Error) => Error,
            (a, b) if a == b => a,
            _ => Error,
        }
    }

    /// `self ⊑ other` in the information order.
    pub fn info_le(self, other: TruthValue) -> bool {
        self.merge(other) == other
    }

    pub fn is_determined(self) -> bool {
        matches!(self, TruthValue::True | TruthValue::False)
    }

    pub fn from_bool(b: bool) -> TruthValue {
        if b {
            TruthValue::True
        } else {
            TruthValue::False
        }
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TruthValue::False => "false",
            TruthValue::True => "true",
            TruthValue::Unknown => "unknown",
            TruthValue::Error => "error",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    RoadPlacement,
    CollisionAvoidance,
    Visibility,
    Positional,
    Distance,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::RoadPlacement,
        Category::CollisionAvoidance,
        Category::Visibility,
        Category::Positional,
        Category::Distance,
    ];

    pub fn short(self) -> &'static str {
        match self {
            Category::RoadPlacement => "road",
            Category::CollisionAvoidance => "coll",
            Category::Visibility => "vis",
            Category::Positional => "pos",
            Category::Distance => "dist",
        }
    }

    /// Comment header used by the text format.
    pub fn header(self) -> &'static str {
        match self {
            Category::RoadPlacement => "road placement",
            Category::CollisionAvoidance => "collision avoidance",
            Category::Visibility => "visibility",
            Category::Positional => "position",
            Category::Distance => "distance",
        }
    }
}

/// A relation symbol. The ten built-in symbols are fixed; additional ones are
/// registered in a [`Vocabulary`] and referenced by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    LeftOf,
    RightOf,
    FrontOf,
    Behind,
    Close,
    Med,
    Far,
    CanSee,
    NoColl,
    OnRoad,
    Custom(u16),
}

impl Relation {
    pub const BUILTIN: [Relation; 10] = [
        Relation::LeftOf,
        Relation::RightOf,
        Relation::FrontOf,
        Relation::Behind,
        Relation::Close,
        Relation::Med,
        Relation::Far,
        Relation::CanSee,
        Relation::NoColl,
        Relation::OnRoad,
    ];

    pub const POSITIONAL: [Relation; 4] = [
        Relation::LeftOf,
        Relation::RightOf,
        Relation::FrontOf,
        Relation::Behind,
    ];

    pub const DISTANCE: [Relation; 3] = [Relation::Close, Relation::Med, Relation::Far];

    /// Canonical spelling of a built-in symbol; `None` for custom symbols.
    pub fn builtin_name(self) -> Option<&'static str> {
        Some(match self {
            Relation::LeftOf => "leftOf",
            Relation::RightOf => "rightOf",
            Relation::FrontOf => "frontOf",
            Relation::Behind => "behind",
            Relation::Close => "close",
            Relation::Med => "med",
            Relation::Far => "far",
            Relation::CanSee => "canSee",
            Relation::NoColl => "noColl",
            Relation::OnRoad => "onRoad",
            Relation::Custom(_) => return None,
        })
    }

    pub fn builtin_category(self) -> Option<Category> {
        Some(match self {
            Relation::LeftOf | Relation::RightOf | Relation::FrontOf | Relation::Behind => {
                Category::Positional
            }
            Relation::Close | Relation::Med | Relation::Far => Category::Distance,
            Relation::CanSee => Category::Visibility,
            Relation::NoColl => Category::CollisionAvoidance,
            Relation::OnRoad => Category::RoadPlacement,
            Relation::Custom(_) => return None,
        })
    }

    pub fn is_positional(self) -> bool {
        Relation::POSITIONAL.contains(&self)
    }

    pub fn is_distance(self) -> bool {
        Relation::DISTANCE.contains(&self)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VocabularyError {
    #[error("relation `{0}` is already defined")]
    Duplicate(String),
    #[error("`{0}` is not a valid relation identifier")]
    InvalidName(String),
}

/// A user-registered relation with its numeric semantics.
#[derive(Clone)]
pub struct CustomRelation {
    pub name: String,
    pub category: Category,
    pub semantics: Arc<dyn RelationSemantics>,
}

/// The relation vocabulary: the built-in symbols plus any registered ones.
#[derive(Clone, Default)]
pub struct Vocabulary {
    custom: Vec<CustomRelation>,
}

impl fmt::Debug for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.custom.iter().map(|c| (&c.name, c.category)))
            .finish()
    }
}

impl Vocabulary {
    pub fn builtin() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::default())
    }

    pub fn register(
        &mut self,
        name: &str,
        category: Category,
        semantics: Arc<dyn RelationSemantics>,
    ) -> Result<Relation, VocabularyError> {
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(VocabularyError::InvalidName(name.to_string()));
        }
        if self.lookup(name).is_some() || name == "Car" {
            return Err(VocabularyError::Duplicate(name.to_string()));
        }
        self.custom.push(CustomRelation {
            name: name.to_string(),
            category,
            semantics,
        });
        Ok(Relation::Custom((self.custom.len() - 1) as u16))
    }

    /// All symbols, built-ins first, in a stable order.
    pub fn symbols(&self) -> impl Iterator<Item = Relation> + '_ {
        Relation::BUILTIN
            .into_iter()
            .chain((0..self.custom.len()).map(|i| Relation::Custom(i as u16)))
    }

    pub fn len(&self) -> usize {
        Relation::BUILTIN.len() + self.custom.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lookup(&self, name: &str) -> Option<Relation> {
        self.symbols().find(|r| self.name(*r) == name)
    }

    pub fn name(&self, rel: Relation) -> &str {
        match rel {
            Relation::Custom(i) => &self.custom[i as usize].name,
            b => b.builtin_name().unwrap(),
        }
    }

    pub fn category(&self, rel: Relation) -> Category {
        match rel {
            Relation::Custom(i) => self.custom[i as usize].category,
            b => b.builtin_category().unwrap(),
        }
    }

    pub fn custom(&self, rel: Relation) -> Option<&CustomRelation> {
        match rel {
            Relation::Custom(i) => self.custom.get(i as usize),
            _ => None,
        }
    }
}

/// 1-based position in a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SourceLoc {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub relation: Relation,
    pub src: String,
    pub tgt: String,
    pub value: TruthValue,
}

impl Assertion {
    pub fn new(relation: Relation, src: &str, tgt: &str, value: TruthValue) -> Assertion {
        Assertion {
            relation,
            src: src.to_string(),
            tgt: tgt.to_string(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertionRecord {
    pub assertion: Assertion,
    pub location: Option<SourceLoc>,
}

/// Relation instance keyed by object indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub relation: Relation,
    pub src: usize,
    pub tgt: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleName {
    Road,
    Loop,
    Sym,
    Pos,
    Dist,
    Custom(String),
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleName::Road => f.write_str("V_road"),
            RuleName::Loop => f.write_str("V_loop"),
            RuleName::Sym => f.write_str("V_sym"),
            RuleName::Pos => f.write_str("V_pos"),
            RuleName::Dist => f.write_str("V_dist"),
            RuleName::Custom(n) => f.write_str(n),
        }
    }
}

/// One rule firing that changed the model. Only the immediate premises are
/// kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub rule: RuleName,
    pub premises: Vec<Atom>,
    pub atom: Atom,
    pub merged: TruthValue,
    pub result: TruthValue,
}

/// A pair rule of the form `premise(a, b) = True ⟹ conclusion(a, b) ⊕= value`
/// (or on `(b, a)` when `reverse` is set).
#[derive(Debug, Clone, PartialEq)]
pub struct CustomRule {
    pub name: String,
    pub premise: Relation,
    pub conclusion: Relation,
    pub value: TruthValue,
    pub reverse: bool,
}

impl CustomRule {
    /// `behind(a, b) ⟹ ¬canSee(a, b)`: an actor cannot see what is behind it.
    pub fn behind_not_visible() -> CustomRule {
        CustomRule {
            name: "V_cust".into(),
            premise: Relation::Behind,
            conclusion: Relation::CanSee,
            value: TruthValue::False,
            reverse: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("duplicate object `{0}`")]
    DuplicateObject(String),
    #[error("assertions cannot carry the error value")]
    ErrorAssertion,
    #[error("models are defined over different object sets")]
    ObjectSetMismatch,
    #[error("abstract model contains error entries")]
    ErrorInAbstract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    InconsistentRelation,
    InvalidOnRoadArity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// An explicit assertion, with its rendering in the text syntax.
    Assertion { record: AssertionRecord, text: String },
    Rule { rule: RuleName, premises: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub relation: String,
    pub src: String,
    pub tgt: String,
    pub provenance: Vec<Provenance>,
}

impl Diagnostic {
    pub fn cites_rule(&self, name: &str) -> bool {
        self.provenance
            .iter()
            .any(|p| matches!(p, Provenance::Rule { rule, .. } if rule.to_string() == name))
    }

    pub fn cited_assertions(&self) -> Vec<&AssertionRecord> {
        self.provenance
            .iter()
            .filter_map(|p| match p {
                Provenance::Assertion { record, .. } => Some(record),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            DiagnosticKind::InconsistentRelation => "inconsistent relation",
            DiagnosticKind::InvalidOnRoadArity => "onRoad between distinct actors",
        };
        writeln!(f, "{what}: {}({}, {})", self.relation, self.src, self.tgt)?;
        for p in &self.provenance {
            match p {
                Provenance::Assertion { record, text } => match record.location {
                    Some(loc) => writeln!(f, "  asserted at {loc}: {text}")?,
                    None => writeln!(f, "  asserted: {text}")?,
                },
                Provenance::Rule { rule, premises } => {
                    if premises.is_empty() {
                        writeln!(f, "  derived by {rule}")?;
                    } else {
                        writeln!(f, "  derived by {rule} from {}", premises.join(", "))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Objects plus a four-valued interpretation. Entries not stored are
/// `Unknown`. The model also remembers the assertions it was built from and
/// the rule firings applied to it, for diagnostics.
#[derive(Clone)]
pub struct PartialModel {
    vocab: Arc<Vocabulary>,
    objects: Vec<String>,
    entries: BTreeMap<Atom, TruthValue>,
    assertions: Vec<AssertionRecord>,
    derivations: Vec<Derivation>,
}

impl fmt::Debug for PartialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (atom, v) in &self.entries {
            m.entry(&self.describe(*atom), v);
        }
        m.finish()
    }
}

/// Equality compares objects and interpretation only.
impl PartialEq for PartialModel {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects && self.entries == other.entries
    }
}

impl PartialModel {
    pub fn new<I, S>(objects: I) -> Result<PartialModel, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PartialModel::with_vocabulary(objects, Vocabulary::builtin())
    }

    pub fn with_vocabulary<I, S>(objects: I, vocab: Arc<Vocabulary>) -> Result<PartialModel, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut list: Vec<String> = Vec::new();
        for o in objects {
            let o = o.into();
            if list.contains(&o) {
                return Err(ModelError::DuplicateObject(o));
            }
            list.push(o);
        }
        Ok(PartialModel {
            vocab,
            objects: list,
            entries: BTreeMap::new(),
            assertions: Vec::new(),
            derivations: Vec::new(),
        })
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == id)
    }

    pub fn assertions(&self) -> &[AssertionRecord] {
        &self.assertions
    }

    pub fn derivations(&self) -> &[Derivation] {
        &self.derivations
    }

    pub fn atom(&self, relation: Relation, src: &str, tgt: &str) -> Result<Atom, ModelError> {
        let s = self
            .object_index(src)
            .ok_or_else(|| ModelError::UnknownObject(src.to_string()))?;
        let t = self
            .object_index(tgt)
            .ok_or_else(|| ModelError::UnknownObject(tgt.to_string()))?;
        Ok(Atom {
            relation,
            src: s,
            tgt: t,
        })
    }

    pub fn value_at(&self, atom: Atom) -> TruthValue {
        self.entries.get(&atom).copied().unwrap_or(TruthValue::Unknown)
    }

    /// Value of `relation(src, tgt)`; `Unknown` for undeclared objects.
    pub fn value(&self, relation: Relation, src: &str, tgt: &str) -> TruthValue {
        match self.atom(relation, src, tgt) {
            Ok(a) => self.value_at(a),
            Err(_) => TruthValue::Unknown,
        }
    }

    /// Non-`Unknown` entries in key order.
    pub fn entries(&self) -> impl Iterator<Item = (Atom, TruthValue)> + '_ {
        self.entries.iter().map(|(a, v)| (*a, *v))
    }

    /// Every relation instance of the vocabulary over the declared objects.
    pub fn universe(&self) -> impl Iterator<Item = Atom> + '_ {
        let n = self.objects.len();
        self.vocab.symbols().flat_map(move |relation| {
            (0..n).flat_map(move |src| (0..n).map(move |tgt| Atom { relation, src, tgt }))
        })
    }

    pub fn describe(&self, atom: Atom) -> String {
        format!(
            "{}({}, {})",
            self.vocab.name(atom.relation),
            self.objects[atom.src],
            self.objects[atom.tgt]
        )
    }

    fn merge_in(&mut self, atom: Atom, value: TruthValue) -> (TruthValue, TruthValue) {
        let old = self.value_at(atom);
        let new = old.merge(value);
        if new == TruthValue::Unknown {
            self.entries.remove(&atom);
        } else {
            self.entries.insert(atom, new);
        }
        (old, new)
    }

    /// Fold one assertion into the model with the information merge.
    pub fn assert_relation(&self, assertion: Assertion) -> Result<PartialModel, ModelError> {
        self.assert_relation_at(assertion, None)
    }

    pub fn assert_relation_at(
        &self,
        assertion: Assertion,
        location: Option<SourceLoc>,
    ) -> Result<PartialModel, ModelError> {
        let mut next = self.clone();
        next.assert_in_place(assertion, location)?;
        Ok(next)
    }

    pub(crate) fn assert_in_place(
        &mut self,
        assertion: Assertion,
        location: Option<SourceLoc>,
    ) -> Result<(), ModelError> {
        if assertion.value == TruthValue::Error {
            return Err(ModelError::ErrorAssertion);
        }
        let atom = self.atom(assertion.relation, &assertion.src, &assertion.tgt)?;
        self.merge_in(atom, assertion.value);
        self.assertions.push(AssertionRecord {
            assertion,
            location,
        });
        Ok(())
    }

    /// Run the built-in validity rules and `custom` rules to a fixpoint.
    ///
    /// Rules fire on premises that are exactly `True` and are swept in a fixed
    /// order (`V_road`, `V_loop`, `V_pos`, `V_dist`, `V_sym`, custom) with
    /// in-place updates, so the result is independent of assertion order.
    pub fn apply_validity_rules(&self, custom: &[CustomRule]) -> (PartialModel, Vec<Derivation>) {
        let mut m = self.clone();
        let first_new = m.derivations.len();
        let n = m.objects.len();
        let symbols: Vec<Relation> = m.vocab.symbols().collect();
        loop {
            let before = m.derivations.len();

            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        m.fire(RuleName::Road, vec![], Atom { relation: Relation::OnRoad, src: a, tgt: b }, TruthValue::False);
                    }
                }
            }
            for o in 0..n {
                for &r in symbols.iter().filter(|r| **r != Relation::OnRoad) {
                    m.fire(RuleName::Loop, vec![], Atom { relation: r, src: o, tgt: o }, TruthValue::False);
                }
            }
            for (rule, family) in [
                (RuleName::Pos, &Relation::POSITIONAL[..]),
                (RuleName::Dist, &Relation::DISTANCE[..]),
            ] {
                for a in 0..n {
                    for b in 0..n {
                        for &r1 in family {
                            let premise = Atom { relation: r1, src: a, tgt: b };
                            if m.value_at(premise) != TruthValue::True {
                                continue;
                            }
                            for &r2 in family.iter().filter(|r| **r != r1) {
                                m.fire(rule.clone(), vec![premise], Atom { relation: r2, src: a, tgt: b }, TruthValue::False);
                            }
                        }
                    }
                }
            }
            for a in 0..n {
                for b in 0..n {
                    for r in Relation::DISTANCE.into_iter().chain([Relation::NoColl]) {
                        let premise = Atom { relation: r, src: a, tgt: b };
                        if m.value_at(premise) == TruthValue::True {
                            m.fire(RuleName::Sym, vec![premise], Atom { relation: r, src: b, tgt: a }, TruthValue::True);
                        }
                    }
                }
            }
            for rule in custom {
                for a in 0..n {
                    for b in 0..n {
                        let premise = Atom { relation: rule.premise, src: a, tgt: b };
                        if m.value_at(premise) != TruthValue::True {
                            continue;
                        }
                        let (s, t) = if rule.reverse { (b, a) } else { (a, b) };
                        m.fire(
                            RuleName::Custom(rule.name.clone()),
                            vec![premise],
                            Atom { relation: rule.conclusion, src: s, tgt: t },
                            rule.value,
                        );
                    }
                }
            }

            if m.derivations.len() == before {
                break;
            }
        }
        let new = m.derivations[first_new..].to_vec();
        (m, new)
    }

    fn fire(&mut self, rule: RuleName, premises: Vec<Atom>, atom: Atom, value: TruthValue) {
        let (old, new) = self.merge_in(atom, value);
        if old != new {
            self.derivations.push(Derivation {
                rule,
                premises,
                atom,
                merged: value,
                result: new,
            });
        }
    }

    /// True when the entry is supported by an explicit (non-`?`) assertion or
    /// by a rule firing with at least one premise. Entries forced only by the
    /// premise-free rules (`V_road`, `V_loop`) are not grounded.
    pub fn is_grounded(&self, atom: Atom) -> bool {
        self.assertions.iter().any(|rec| {
            rec.assertion.value != TruthValue::Unknown
                && self.atom(rec.assertion.relation, &rec.assertion.src, &rec.assertion.tgt) == Ok(atom)
        }) || self
            .derivations
            .iter()
            .any(|d| d.atom == atom && !d.premises.is_empty())
    }

    fn records_for(&self, atom: Atom) -> impl Iterator<Item = &AssertionRecord> + '_ {
        self.assertions.iter().filter(move |rec| {
            self.atom(rec.assertion.relation, &rec.assertion.src, &rec.assertion.tgt) == Ok(atom)
        })
    }

    fn cite(&self, rec: &AssertionRecord) -> Provenance {
        let a = &rec.assertion;
        let prefix = match a.value {
            TruthValue::False => "!",
            TruthValue::Unknown => "?",
            _ => "",
        };
        Provenance::Assertion {
            record: rec.clone(),
            text: format!("{prefix}{}({}, {})", self.vocab.name(a.relation), a.src, a.tgt),
        }
    }

    /// One diagnostic per `Error` entry, with the assertions and rule firings
    /// that produced it.
    pub fn find_inconsistencies(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (atom, v) in self.entries() {
            if v != TruthValue::Error {
                continue;
            }
            let mut provenance: Vec<Provenance> = Vec::new();
            let push = |p: Provenance, provenance: &mut Vec<Provenance>| {
                if !provenance.contains(&p) {
                    provenance.push(p);
                }
            };
            for rec in self.records_for(atom) {
                push(self.cite(rec), &mut provenance);
            }
            for d in self.derivations.iter().filter(|d| d.atom == atom) {
                push(
                    Provenance::Rule {
                        rule: d.rule.clone(),
                        premises: d.premises.iter().map(|p| self.describe(*p)).collect(),
                    },
                    &mut provenance,
                );
                for p in &d.premises {
                    for rec in self.records_for(*p) {
                        push(self.cite(rec), &mut provenance);
                    }
                }
            }
            let kind = if atom.relation == Relation::OnRoad && atom.src != atom.tgt {
                DiagnosticKind::InvalidOnRoadArity
            } else {
                DiagnosticKind::InconsistentRelation
            };
            out.push(Diagnostic {
                kind,
                relation: self.vocab.name(atom.relation).to_string(),
                src: self.objects[atom.src].clone(),
                tgt: self.objects[atom.tgt].clone(),
                provenance,
            });
        }
        out
    }

    /// Every entry is `True` or `False`.
    pub fn is_concrete(&self) -> bool {
        self.universe().all(|a| self.value_at(a).is_determined())
    }

    pub fn has_errors(&self) -> bool {
        self.entries.values().any(|v| *v == TruthValue::Error)
    }

    /// `abstract ⊑ concrete`: determined values are kept and every `Unknown`
    /// is resolved to `True` or `False`.
    pub fn refines(abstract_model: &PartialModel, concrete: &PartialModel) -> Result<bool, ModelError> {
        let mut a_sorted = abstract_model.objects.clone();
        let mut c_sorted = concrete.objects.clone();
        a_sorted.sort();
        c_sorted.sort();
        if a_sorted != c_sorted {
            return Err(ModelError::ObjectSetMismatch);
        }
        if abstract_model.has_errors() {
            return Err(ModelError::ErrorInAbstract);
        }
        let remap: Vec<usize> = abstract_model
            .objects
            .iter()
            .map(|o| concrete.object_index(o).unwrap())
            .collect();
        for atom in abstract_model.universe() {
            let a = abstract_model.value_at(atom);
            let c = concrete.value_at(Atom {
                relation: atom.relation,
                src: remap[atom.src],
                tgt: remap[atom.tgt],
            });
            let ok = match a {
                TruthValue::Unknown => c.is_determined(),
                v => c == v,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Keep only the assertions matching `keep`, rebuilding the model from
    /// them (rules are not applied).
    pub fn restrict_assertions<F>(&self, keep: F) -> PartialModel
    where
        F: Fn(&Assertion) -> bool,
    {
        let mut m = PartialModel {
            vocab: self.vocab.clone(),
            objects: self.objects.clone(),
            entries: BTreeMap::new(),
            assertions: Vec::new(),
            derivations: Vec::new(),
        };
        for rec in self.assertions.iter().filter(|r| keep(&r.assertion)) {
            m.assert_in_place(rec.assertion.clone(), rec.location)
                .expect("assertion was valid in the source model");
        }
        m
    }

    /// Set an entry directly, bypassing the merge. Used to build concrete
    /// models from evaluated scenes.
    pub(crate) fn set_value(&mut self, atom: Atom, value: TruthValue) {
        if value == TruthValue::Unknown {
            self.entries.remove(&atom);
        } else {
            self.entries.insert(atom, value);
        }
    }
}
