//! Heard-of predicates stored as unions of per-receiver products.
//!
//! Heard-of predicates get large fast (a product over 7 generator sets at
//! `n = 3`, `R = 3` has 40 million members), but the sets produced here are
//! always unions of a few products `A_0 × .. × A_{n-1}` where `A_p` is a set
//! of columns for receiver `p`. Inclusion and counting work on that form
//! directly by partitioning columns by the products that contain them.

use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundedCollection, SenderSet, Shape};

/// Above this many products, new products are only deduplicated, not absorbed.
const ABSORB_LIMIT: usize = 4096;

type Columns = Arc<Vec<u128>>;

#[derive(Clone, Debug)]
struct Product {
    // sorted packed columns, one set per receiver
    receivers: Vec<Columns>,
}

impl Product {
    fn contains(&self, columns: &[u128]) -> bool {
        self.receivers.iter().zip(columns).all(|(set, c)| set.binary_search(c).is_ok())
    }

    fn is_empty(&self) -> bool {
        self.receivers.iter().any(|s| s.is_empty())
    }

    fn is_within(&self, other: &Product) -> bool {
        self.receivers.iter().zip(&other.receivers).all(|(a, b)| sorted_subset(a, b))
    }

    fn size(&self) -> u128 {
        self.receivers.iter().map(|s| s.len() as u128).product()
    }
}

fn sorted_subset(a: &[u128], b: &[u128]) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

/// A finite set of heard-of collections sharing one shape.
#[derive(Clone, Debug)]
pub struct HeardOfPredicate {
    shape: Shape,
    products: Vec<Product>,
}

impl HeardOfPredicate {
    pub fn empty(shape: Shape) -> Self {
        HeardOfPredicate { shape, products: Vec::new() }
    }

    /// Every collection whose slots all lie in `generators`.
    pub fn product(generators: impl IntoIterator<Item = SenderSet>, n: usize, horizon: usize) -> Result<Self> {
        let shape = Shape::new(n, horizon)?;
        let mut generators: Vec<SenderSet> = generators.into_iter().collect();
        generators.sort();
        generators.dedup();
        if generators.is_empty() {
            return Err(Error::EmptyGenerators);
        }
        for g in &generators {
            shape.check_set(*g)?;
        }
        let mut columns = vec![0u128];
        for round in 1..=horizon {
            let shift = (round - 1) * n;
            columns =
                columns.iter().flat_map(|c| generators.iter().map(move |g| c | (g.bits() as u128) << shift)).collect();
        }
        columns.sort_unstable();
        let shared = Arc::new(columns);
        Ok(HeardOfPredicate { shape, products: vec![Product { receivers: vec![shared; n] }] })
    }

    pub fn from_collections(shape: Shape, collections: impl IntoIterator<Item = BoundedCollection>) -> Result<Self> {
        // group by all columns but the first, so each group is one product
        let mut groups: FxHashMap<Vec<u128>, Vec<u128>> = FxHashMap::default();
        for c in collections {
            shape.ensure_same(c.shape())?;
            let columns: Vec<u128> = (0..shape.n).map(|p| shape.column_bits(c.raw(), p)).collect();
            groups.entry(columns[1..].to_vec()).or_default().push(columns[0]);
        }
        let mut out = HeardOfPredicate::empty(shape);
        let mut keys: Vec<_> = groups.into_iter().collect();
        keys.sort();
        for (rest, mut firsts) in keys {
            firsts.sort_unstable();
            firsts.dedup();
            let mut receivers = vec![Arc::new(firsts)];
            receivers.extend(rest.into_iter().map(|c| Arc::new(vec![c])));
            out.products.push(Product { receivers });
        }
        Ok(out)
    }

    /// Adds `A_0 × .. × A_{n-1}` given as packed columns per receiver.
    pub(crate) fn add_product(&mut self, receivers: Vec<Columns>) {
        debug_assert_eq!(receivers.len(), self.shape.n);
        let product = Product { receivers };
        if product.is_empty() {
            return;
        }
        if self.products.len() < ABSORB_LIMIT {
            if self.products.iter().any(|p| product.is_within(p)) {
                return;
            }
            self.products.retain(|p| !p.is_within(&product));
        }
        self.products.push(product);
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn horizon(&self) -> usize {
        self.shape.horizon
    }

    pub fn product_count(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    fn columns_of(&self, c: &BoundedCollection) -> Vec<u128> {
        (0..self.shape.n).map(|p| self.shape.column_bits(c.raw(), p)).collect()
    }

    pub fn contains(&self, c: &BoundedCollection) -> bool {
        if c.shape() != self.shape {
            return false;
        }
        let columns = self.columns_of(c);
        self.products.iter().any(|p| p.contains(&columns))
    }

    /// Exact number of distinct members.
    pub fn len(&self) -> u128 {
        let all: Vec<usize> = (0..self.products.len()).collect();
        let mut memo = FxHashMap::default();
        self.count_from(&all, 0, &mut memo)
    }

    /// Members whose first `receiver` columns were already fixed to values
    /// contained exactly by the products in `live`.
    fn count_from(&self, live: &[usize], receiver: usize, memo: &mut FxHashMap<(Vec<usize>, usize), u128>) -> u128 {
        if let Some(v) = memo.get(&(live.to_vec(), receiver)) {
            return *v;
        }
        let groups = self.partition(live, receiver);
        let total = if receiver + 1 == self.shape.n {
            groups.values().map(|cols| cols.len() as u128).sum()
        } else {
            groups.iter().map(|(sig, cols)| cols.len() as u128 * self.count_from(sig, receiver + 1, memo)).sum()
        };
        memo.insert((live.to_vec(), receiver), total);
        total
    }

    /// Columns of `receiver` present in some product of `live`, grouped by the
    /// exact list of those products containing them.
    fn partition(&self, live: &[usize], receiver: usize) -> FxHashMap<Vec<usize>, Vec<u128>> {
        let mut owners: FxHashMap<u128, Vec<usize>> = FxHashMap::default();
        for i in live {
            for c in self.products[*i].receivers[receiver].iter() {
                owners.entry(*c).or_default().push(*i);
            }
        }
        let mut groups: FxHashMap<Vec<usize>, Vec<u128>> = FxHashMap::default();
        for (c, sig) in owners {
            groups.entry(sig).or_default().push(c);
        }
        groups
    }

    /// `None` if every member of `self` is in `other`, else a missing member.
    pub fn missing_from(&self, other: &HeardOfPredicate) -> Option<BoundedCollection> {
        if self.shape != other.shape {
            return self.iter().next();
        }
        let all: Vec<usize> = (0..other.products.len()).collect();
        let mut witnesses: Vec<Vec<u128>> = Vec::new();
        for product in &self.products {
            let mut memo = FxHashMap::default();
            if let Some(w) = other.uncovered(product, &all, 0, &mut memo) {
                witnesses.push(w);
            }
        }
        witnesses
            .into_iter()
            .map(|columns| BoundedCollection::from_raw(self.shape, self.shape.pack_columns(&columns)))
            .min_by(|a, b| a.canonical_cmp(b))
    }

    /// Looks for a member of `x` restricted to receivers `receiver..` that no
    /// product in `live` contains; returns its remaining columns.
    fn uncovered(
        &self,
        x: &Product,
        live: &[usize],
        receiver: usize,
        memo: &mut FxHashMap<(Vec<usize>, usize), Option<Vec<u128>>>,
    ) -> Option<Vec<u128>> {
        if let Some(v) = memo.get(&(live.to_vec(), receiver)) {
            return v.clone();
        }
        let mut by_sig: FxHashMap<Vec<usize>, u128> = FxHashMap::default();
        let mut best: Option<Vec<u128>> = None;
        for c in x.receivers[receiver].iter() {
            let sig: Vec<usize> = live
                .iter()
                .copied()
                .filter(|i| self.products[*i].receivers[receiver].binary_search(c).is_ok())
                .collect();
            by_sig.entry(sig).or_insert(*c);
        }
        let mut entries: Vec<(Vec<usize>, u128)> = by_sig.into_iter().collect();
        entries.sort_by_key(|(_, c)| *c);
        for (sig, c) in entries {
            let found = if sig.is_empty() {
                let mut w = vec![c];
                w.extend(x.receivers[receiver + 1..].iter().map(|s| s[0]));
                Some(w)
            } else if receiver + 1 == self.shape.n {
                None
            } else {
                self.uncovered(x, &sig, receiver + 1, memo).map(|rest| {
                    let mut w = vec![c];
                    w.extend(rest);
                    w
                })
            };
            if let Some(w) = found {
                if best.as_ref().is_none_or(|b| w < *b) {
                    best = Some(w);
                }
            }
        }
        memo.insert((live.to_vec(), receiver), best.clone());
        best
    }

    pub fn is_subset(&self, other: &HeardOfPredicate) -> bool {
        self.shape == other.shape && self.missing_from(other).is_none()
    }

    /// Member of one side but not the other, if any.
    pub fn difference_witness(&self, other: &HeardOfPredicate) -> Option<BoundedCollection> {
        self.missing_from(other).or_else(|| other.missing_from(self))
    }

    pub fn union(&self, other: &HeardOfPredicate) -> Result<Self> {
        self.shape.ensure_same(other.shape)?;
        let mut out = self.clone();
        for p in &other.products {
            out.add_product(p.receivers.clone());
        }
        Ok(out)
    }

    /// Members, each once, grouped by product.
    pub fn iter(&self) -> impl Iterator<Item = BoundedCollection> + '_ {
        let shape = self.shape;
        self.products.iter().enumerate().flat_map(move |(i, product)| {
            let earlier = &self.products[..i];
            ProductIter::new(product).filter_map(move |columns| {
                if earlier.iter().any(|p| p.contains(&columns)) {
                    None
                } else {
                    Some(BoundedCollection::from_raw(shape, shape.pack_columns(&columns)))
                }
            })
        })
    }

    /// All members in canonical order; refuses above `limit`.
    pub fn to_sorted_vec(&self, limit: u128) -> Result<Vec<BoundedCollection>> {
        let len = self.len();
        if len > limit {
            return Err(Error::SizeGuard(format!("{len} heard-of collections exceed the listing limit {limit}")));
        }
        let mut out: Vec<BoundedCollection> = self.iter().collect();
        out.sort_by(|a, b| a.canonical_cmp(b));
        Ok(out)
    }

    /// Upper bound on the member count, cheap to compute.
    pub fn size_bound(&self) -> u128 {
        self.products.iter().map(Product::size).sum()
    }
}

impl PartialEq for HeardOfPredicate {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.is_subset(other) && other.is_subset(self)
    }
}

impl Eq for HeardOfPredicate {}

struct ProductIter<'a> {
    product: &'a Product,
    index: Vec<usize>,
    done: bool,
}

impl<'a> ProductIter<'a> {
    fn new(product: &'a Product) -> Self {
        ProductIter { product, index: vec![0; product.receivers.len()], done: product.is_empty() }
    }
}

impl Iterator for ProductIter<'_> {
    type Item = Vec<u128>;

    fn next(&mut self) -> Option<Vec<u128>> {
        if self.done {
            return None;
        }
        let item = self.index.iter().zip(&self.product.receivers).map(|(i, s)| s[*i]).collect();
        // odometer with the last receiver moving fastest
        let mut k = self.index.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.index[k] += 1;
            if self.index[k] < self.product.receivers[k].len() {
                break;
            }
            self.index[k] = 0;
        }
        Some(item)
    }
}

pub fn ho_product(
    generators: impl IntoIterator<Item = SenderSet>,
    n: usize,
    horizon: usize,
) -> Result<HeardOfPredicate> {
    HeardOfPredicate::product(generators, n, horizon)
}

pub fn pho_equal(h1: &HeardOfPredicate, h2: &HeardOfPredicate) -> Result<bool> {
    h1.shape.ensure_same(h2.shape)?;
    Ok(h1 == h2)
}

pub fn pho_subset(h1: &HeardOfPredicate, h2: &HeardOfPredicate) -> Result<bool> {
    h1.shape.ensure_same(h2.shape)?;
    Ok(h1.is_subset(h2))
}

/// Collections are listed in JSON only up to this many members.
pub const JSON_LISTING_LIMIT: u128 = 4096;

#[derive(Serialize, Deserialize)]
struct RawProduct {
    receivers: Vec<Vec<Vec<SenderSet>>>,
}

#[derive(Serialize, Deserialize)]
struct RawHeardOf {
    n: usize,
    horizon: usize,
    count: u128,
    products: Vec<RawProduct>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    collections: Option<Vec<BoundedCollection>>,
}

impl Serialize for HeardOfPredicate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let shape = self.shape;
        let unpack = |c: &u128| (1..=shape.horizon).map(|r| shape.column_slot(*c, r)).collect::<Vec<_>>();
        let products = self
            .products
            .iter()
            .map(|p| RawProduct { receivers: p.receivers.iter().map(|s| s.iter().map(unpack).collect()).collect() })
            .collect();
        let count = self.len();
        let collections = if count <= JSON_LISTING_LIMIT { self.to_sorted_vec(JSON_LISTING_LIMIT).ok() } else { None };
        RawHeardOf { n: shape.n, horizon: shape.horizon, count, products, collections }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HeardOfPredicate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawHeardOf::deserialize(deserializer)?;
        let shape = Shape::new(raw.n, raw.horizon).map_err(D::Error::custom)?;
        let mut out = HeardOfPredicate::empty(shape);
        for p in raw.products {
            if p.receivers.len() != shape.n {
                return Err(D::Error::custom(format!(
                    "product lists {} receivers, expected {}",
                    p.receivers.len(),
                    shape.n
                )));
            }
            let mut receivers = Vec::new();
            for columns in p.receivers {
                let mut packed = Vec::new();
                for column in columns {
                    if column.len() != shape.horizon {
                        return Err(D::Error::custom("column length differs from horizon"));
                    }
                    for s in &column {
                        shape.check_set(*s).map_err(D::Error::custom)?;
                    }
                    packed.push(crate::model::pack_prefix(&column, shape.n));
                }
                packed.sort_unstable();
                packed.dedup();
                receivers.push(Arc::new(packed));
            }
            out.add_product(receivers);
        }
        Ok(out)
    }
}
