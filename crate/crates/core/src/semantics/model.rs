use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::Language;

/// A set of `arity`-tuples over `{0, …, size-1}`, stored as a bitmap in
/// lexicographic tuple order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleSet {
    arity: usize,
    size: usize,
    bits: Vec<bool>,
}

fn pow(size: usize, arity: usize) -> usize {
    size.checked_pow(arity as u32).expect("tuple space too large")
}

impl TupleSet {
    pub fn empty(arity: usize, size: usize) -> TupleSet {
        TupleSet {
            arity,
            size,
            bits: vec![false; pow(size, arity)],
        }
    }

    pub fn full(arity: usize, size: usize) -> TupleSet {
        TupleSet {
            arity,
            size,
            bits: vec![true; pow(size, arity)],
        }
    }

    pub(crate) fn from_bits(arity: usize, size: usize, bits: Vec<bool>) -> TupleSet {
        assert_eq!(bits.len(), pow(size, arity));
        TupleSet { arity, size, bits }
    }

    pub fn from_tuples<'a>(
        arity: usize,
        size: usize,
        tuples: impl IntoIterator<Item = &'a [usize]>,
    ) -> Result<TupleSet> {
        let mut s = TupleSet::empty(arity, size);
        for t in tuples {
            if t.len() != arity {
                return Err(Error::InvalidModel(format!("tuple {t:?} does not have arity {arity}")));
            }
            if let Some(&bad) = t.iter().find(|&&e| e >= size) {
                return Err(Error::InvalidModel(format!(
                    "entry {bad} out of bounds for size {size}"
                )));
            }
            s.insert(t);
        }
        Ok(s)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn index_of(&self, t: &[usize]) -> usize {
        debug_assert_eq!(t.len(), self.arity);
        t.iter().fold(0, |acc, &e| acc * self.size + e)
    }

    pub fn tuple_at(&self, mut index: usize) -> Vec<usize> {
        let mut t = vec![0; self.arity];
        for slot in t.iter_mut().rev() {
            *slot = index % self.size;
            index /= self.size;
        }
        t
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        t.len() == self.arity && t.iter().all(|&e| e < self.size) && self.bits[self.index_of(t)]
    }

    pub fn insert(&mut self, t: &[usize]) {
        let i = self.index_of(t);
        self.bits[i] = true;
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.bits[index] = value;
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Tuples in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.tuple_at(i))
    }

    pub fn is_subset(&self, other: &TupleSet) -> bool {
        self.same_shape(other);
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Lexicographically least tuple in `self` but not in `other`.
    pub fn first_outside(&self, other: &TupleSet) -> Option<Vec<usize>> {
        self.same_shape(other);
        self.bits
            .iter()
            .zip(&other.bits)
            .position(|(&a, &b)| a && !b)
            .map(|i| self.tuple_at(i))
    }

    pub fn complement(&self) -> TupleSet {
        TupleSet {
            arity: self.arity,
            size: self.size,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn union(&self, other: &TupleSet) -> TupleSet {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &TupleSet) -> TupleSet {
        self.zip(other, |a, b| a && b)
    }

    fn zip(&self, other: &TupleSet, op: impl Fn(bool, bool) -> bool) -> TupleSet {
        self.same_shape(other);
        TupleSet {
            arity: self.arity,
            size: self.size,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect(),
        }
    }

    fn same_shape(&self, other: &TupleSet) {
        assert_eq!(
            (self.arity, self.size),
            (other.arity, other.size),
            "tuple sets of different shapes"
        );
    }

    /// `{ (g(t₁), …, g(tₙ)) : t ∈ self }`.
    pub fn permute(&self, perm: &[usize]) -> TupleSet {
        let mut out = TupleSet::empty(self.arity, self.size);
        for t in self.iter() {
            let image: Vec<usize> = t.iter().map(|&e| perm[e]).collect();
            out.insert(&image);
        }
        out
    }
}

/// A relational structure on `{0, …, size-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteModel {
    size: usize,
    relations: BTreeMap<String, TupleSet>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    size: usize,
    relations: BTreeMap<String, Vec<Vec<usize>>>,
}

impl FiniteModel {
    /// The model of the given size with every relation empty.
    pub fn empty(lang: &Language, size: usize) -> FiniteModel {
        FiniteModel {
            size,
            relations: lang
                .relations()
                .iter()
                .map(|r| (r.name.clone(), TupleSet::empty(r.arity, size)))
                .collect(),
        }
    }

    pub fn new(size: usize, relations: BTreeMap<String, TupleSet>) -> Result<FiniteModel> {
        if let Some((name, _)) = relations.iter().find(|(_, t)| t.size() != size) {
            return Err(Error::InvalidModel(format!(
                "table {name} is over a universe of the wrong size"
            )));
        }
        Ok(FiniteModel { size, relations })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relation(&self, name: &str) -> Option<&TupleSet> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> &BTreeMap<String, TupleSet> {
        &self.relations
    }

    pub(crate) fn relation_mut(&mut self, name: &str) -> &mut TupleSet {
        self.relations.get_mut(name).expect("relation present")
    }

    pub fn with_relation(mut self, name: impl Into<String>, table: TupleSet) -> FiniteModel {
        assert_eq!(table.size(), self.size);
        self.relations.insert(name.into(), table);
        self
    }

    /// Checks that the tables are exactly those of `lang`.
    pub fn check_language(&self, lang: &Language) -> Result<()> {
        for r in lang.relations() {
            match self.relations.get(&r.name) {
                None => return Err(Error::LanguageMismatch(format!("model has no table for {}", r.name))),
                Some(t) if t.arity() != r.arity => {
                    return Err(Error::LanguageMismatch(format!(
                        "table {} has arity {}, expected {}",
                        r.name,
                        t.arity(),
                        r.arity
                    )))
                }
                _ => {}
            }
        }
        if let Some(name) = self.relations.keys().find(|n| lang.arity(n).is_none()) {
            return Err(Error::LanguageMismatch(format!(
                "model has table {name} not in the language"
            )));
        }
        Ok(())
    }

    /// Keeps only the tables of `lang`.
    pub fn restrict(&self, lang: &Language) -> Result<FiniteModel> {
        let mut relations = BTreeMap::new();
        for r in lang.relations() {
            let t = self
                .relations
                .get(&r.name)
                .ok_or_else(|| Error::LanguageMismatch(format!("model has no table for {}", r.name)))?;
            relations.insert(r.name.clone(), t.clone());
        }
        Ok(FiniteModel {
            size: self.size,
            relations,
        })
    }

    /// The pushforward `g·M`, whose tables are the images under `perm`.
    pub fn permute(&self, perm: &[usize]) -> FiniteModel {
        assert_eq!(perm.len(), self.size);
        FiniteModel {
            size: self.size,
            relations: self
                .relations
                .iter()
                .map(|(n, t)| (n.clone(), t.permute(perm)))
                .collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = ModelJson {
            size: self.size,
            relations: self
                .relations
                .iter()
                .map(|(n, t)| (n.clone(), t.iter().collect()))
                .collect(),
        };
        serde_json::to_value(j).expect("model serializes")
    }

    /// Reads a model; relations missing from the JSON are empty.
    pub fn from_json(value: &serde_json::Value, lang: &Language) -> Result<FiniteModel> {
        let j: ModelJson = serde_json::from_value(value.clone()).map_err(|e| Error::InvalidModel(e.to_string()))?;
        let mut m = FiniteModel::empty(lang, j.size);
        for (name, tuples) in j.relations {
            let arity = lang
                .arity(&name)
                .ok_or_else(|| Error::LanguageMismatch(format!("unknown relation {name}")))?;
            let table = TupleSet::from_tuples(arity, j.size, tuples.iter().map(Vec::as_slice))
                .map_err(|e| Error::InvalidModel(format!("{name}: {e}")))?;
            m.relations.insert(name, table);
        }
        Ok(m)
    }
}
