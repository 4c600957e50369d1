//! Finite MDP data model: states, admissible actions, one-step costs and the
//! controlled transition kernel, plus stationary policies and value vectors.
//!
//! Identifiers are strings in model documents and dense indices in memory.
//! Admissible actions of a state are stored sorted by action index, so the
//! position of an action inside that list (its *choice index*) orders the
//! same way as the action identifiers do.

use std::fmt;
use std::ops::{Index, IndexMut};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ModelError, Result};

/// Row sums must equal 1 within this tolerance; rows are never renormalized.
pub const ROW_SUM_TOL: f64 = 1e-10;

/// One admissible pair (x, a): its cost and its transition row.
#[derive(Clone, Debug, PartialEq)]
pub struct Choice {
    pub action: usize,
    pub cost: f64,
    /// Dense row over all states.
    pub row: Vec<f64>,
}

impl Choice {
    /// Successor states with positive probability.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(y, &p)| (y, p))
    }
}

/// Finite MDP. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Mdp {
    states: Vec<String>,
    actions: Vec<String>,
    choices: Vec<Vec<Choice>>,
}

impl Mdp {
    /// Builds and validates a model from dense parts. `choices[x]` lists the
    /// admissible pairs of state `x` in any order; they are sorted by action.
    pub fn from_parts(
        states: Vec<String>,
        actions: Vec<String>,
        mut choices: Vec<Vec<Choice>>,
    ) -> Result<Self, ModelError> {
        if states.is_empty() {
            return Err(ModelError::NoStates);
        }
        if actions.is_empty() {
            return Err(ModelError::NoActions);
        }
        check_unique(&states, ModelError::DuplicateState)?;
        check_unique(&actions, ModelError::DuplicateAction)?;
        if choices.len() != states.len() {
            return Err(ModelError::MissingAdmissible(
                states[choices.len().min(states.len() - 1)].clone(),
            ));
        }
        let n = states.len();
        for (x, list) in choices.iter_mut().enumerate() {
            let state = &states[x];
            if list.is_empty() {
                return Err(ModelError::EmptyAdmissible(state.clone()));
            }
            list.sort_by_key(|c| c.action);
            for w in list.windows(2) {
                if w[0].action == w[1].action {
                    return Err(ModelError::DuplicateAdmissible {
                        state: state.clone(),
                        action: actions[w[0].action].clone(),
                    });
                }
            }
            for c in list.iter() {
                let action = actions
                    .get(c.action)
                    .ok_or_else(|| ModelError::UnknownAction {
                        state: state.clone(),
                        action: format!("#{}", c.action),
                    })?;
                if !c.cost.is_finite() {
                    return Err(ModelError::NonFiniteCost {
                        state: state.clone(),
                        action: action.clone(),
                    });
                }
                if c.row.len() != n {
                    return Err(ModelError::RowSum {
                        state: state.clone(),
                        action: action.clone(),
                        sum: f64::NAN,
                    });
                }
                for (y, &p) in c.row.iter().enumerate() {
                    if !(p.is_finite() && p >= 0.0) {
                        return Err(ModelError::BadProbability {
                            state: state.clone(),
                            action: action.clone(),
                            target: states[y].clone(),
                            value: p,
                        });
                    }
                }
                let sum: f64 = c.row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(ModelError::RowSum {
                        state: state.clone(),
                        action: action.clone(),
                        sum,
                    });
                }
            }
        }
        Ok(Self {
            states,
            actions,
            choices,
        })
    }

    /// Parses and validates a JSON model document.
    pub fn from_json(source: &str) -> Result<Self, ModelError> {
        let doc: ModelDocument = serde_json::from_str(source)?;
        doc.into_mdp()
    }

    pub fn to_document(&self) -> ModelDocument {
        let mut admissible = IndexMap::new();
        let mut cost = IndexMap::new();
        let mut transitions = IndexMap::new();
        for (x, list) in self.choices.iter().enumerate() {
            let state = self.states[x].clone();
            admissible.insert(
                state.clone(),
                list.iter().map(|c| self.actions[c.action].clone()).collect(),
            );
            let mut costs = IndexMap::new();
            let mut rows = IndexMap::new();
            for c in list {
                let action = self.actions[c.action].clone();
                costs.insert(action.clone(), c.cost);
                rows.insert(
                    action,
                    c.support()
                        .map(|(y, p)| (self.states[y].clone(), p))
                        .collect(),
                );
            }
            cost.insert(state.clone(), costs);
            transitions.insert(state, rows);
        }
        ModelDocument {
            name: None,
            states: self.states.clone(),
            actions: self.actions.clone(),
            admissible,
            cost,
            transitions,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model document serializes")
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn state_name(&self, x: usize) -> &str {
        &self.states[x]
    }

    pub fn action_name(&self, a: usize) -> &str {
        &self.actions[a]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|s| s == name)
    }

    /// Admissible pairs of state `x`, sorted by action index.
    pub fn choices(&self, x: usize) -> &[Choice] {
        &self.choices[x]
    }

    /// The admissible pair (x, a), if `a ∈ A(x)`.
    pub fn choice(&self, x: usize, action: usize) -> Option<&Choice> {
        let list = &self.choices[x];
        list.binary_search_by_key(&action, |c| c.action)
            .ok()
            .map(|i| &list[i])
    }

    /// Number of stationary policies, ∏ |A(x)|.
    pub fn policy_count(&self) -> u128 {
        self.choices
            .iter()
            .fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128))
    }

    pub fn resolve_state(&self, name: &str) -> Result<usize> {
        self.state_index(name)
            .ok_or_else(|| ModelError::UnknownState(name.to_string()).into())
    }
}

fn check_unique(names: &[String], err: fn(String) -> ModelError) -> Result<(), ModelError> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(err(n.clone()));
        }
    }
    Ok(())
}

/// On-disk JSON layout of a model.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub admissible: IndexMap<String, Vec<String>>,
    pub cost: IndexMap<String, IndexMap<String, f64>>,
    pub transitions: IndexMap<String, IndexMap<String, IndexMap<String, f64>>>,
}

impl ModelDocument {
    pub fn into_mdp(self) -> Result<Mdp, ModelError> {
        let state_ix = |name: &str| {
            self.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| ModelError::UnknownState(name.to_string()))
        };
        let action_ix = |state: &str, name: &str| {
            self.actions
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| ModelError::UnknownAction {
                    state: state.to_string(),
                    action: name.to_string(),
                })
        };
        for key in self
            .admissible
            .keys()
            .chain(self.cost.keys())
            .chain(self.transitions.keys())
        {
            state_ix(key)?;
        }

        let n = self.states.len();
        let mut choices = Vec::with_capacity(n);
        for state in &self.states {
            let listed = self
                .admissible
                .get(state)
                .ok_or_else(|| ModelError::MissingAdmissible(state.clone()))?;
            if listed.is_empty() {
                return Err(ModelError::EmptyAdmissible(state.clone()));
            }
            let costs = self.cost.get(state);
            let rows = self.transitions.get(state);
            for action in costs.into_iter().flat_map(|m| m.keys()) {
                action_ix(state, action)?;
                if !listed.contains(action) {
                    return Err(ModelError::StrayCost {
                        state: state.clone(),
                        action: action.clone(),
                    });
                }
            }
            for action in rows.into_iter().flat_map(|m| m.keys()) {
                action_ix(state, action)?;
                if !listed.contains(action) {
                    return Err(ModelError::StrayTransition {
                        state: state.clone(),
                        action: action.clone(),
                    });
                }
            }
            let mut list = Vec::with_capacity(listed.len());
            for action in listed {
                let a = action_ix(state, action)?;
                let cost = *costs.and_then(|m| m.get(action)).ok_or_else(|| {
                    ModelError::MissingCost {
                        state: state.clone(),
                        action: action.clone(),
                    }
                })?;
                let mut row = vec![0.0; n];
                if let Some(entries) = rows.and_then(|m| m.get(action)) {
                    for (target, &p) in entries {
                        row[state_ix(target)?] += p;
                    }
                }
                list.push(Choice {
                    action: a,
                    cost,
                    row,
                });
            }
            choices.push(list);
        }
        Mdp::from_parts(self.states, self.actions, choices)
    }
}

/// Parses and validates a model document.
pub fn load_model(source: &str) -> Result<Mdp, ModelError> {
    Mdp::from_json(source)
}

/// ‖C‖: the largest |C(x, a)| over admissible pairs.
pub fn max_cost_norm(m: &Mdp) -> f64 {
    m.choices
        .iter()
        .flatten()
        .map(|c| c.cost.abs())
        .fold(0.0, f64::max)
}

/// Risk sensitivity λ > 0.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct RiskCoefficient(f64);

impl RiskCoefficient {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > 0.0 {
            Ok(Self(lambda))
        } else {
            Err(Error::InvalidLambda(lambda))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// A stationary policy f ∈ F, stored as one choice index per state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StationaryPolicy {
    choice: Vec<usize>,
}

impl StationaryPolicy {
    /// Builds a policy from per-state action indices.
    pub fn from_actions(m: &Mdp, actions: &[usize]) -> Result<Self> {
        if actions.len() != m.n_states() {
            return Err(Error::DimensionMismatch {
                expected: m.n_states(),
                got: actions.len(),
            });
        }
        let mut choice = Vec::with_capacity(actions.len());
        for (x, &a) in actions.iter().enumerate() {
            let pos = m.choices(x).iter().position(|c| c.action == a).ok_or_else(|| {
                Error::InadmissibleAction {
                    state: m.state_name(x).to_string(),
                    action: m
                        .action_names()
                        .get(a)
                        .cloned()
                        .unwrap_or_else(|| format!("#{a}")),
                }
            })?;
            choice.push(pos);
        }
        Ok(Self { choice })
    }

    /// Builds a policy from `(state, action)` name pairs; states not listed
    /// take their first admissible action.
    pub fn from_names<S: AsRef<str>>(m: &Mdp, pairs: &[(S, S)]) -> Result<Self> {
        let mut actions: Vec<usize> = (0..m.n_states()).map(|x| m.choices(x)[0].action).collect();
        for (s, a) in pairs {
            let x = m.resolve_state(s.as_ref())?;
            let a = m.action_index(a.as_ref()).ok_or_else(|| ModelError::UnknownAction {
                state: s.as_ref().to_string(),
                action: a.as_ref().to_string(),
            })?;
            actions[x] = a;
        }
        Self::from_actions(m, &actions)
    }

    /// Builds a policy from choice indices (positions in each admissible list).
    pub fn from_choice_indices(m: &Mdp, choice: Vec<usize>) -> Result<Self> {
        if choice.len() != m.n_states() {
            return Err(Error::DimensionMismatch {
                expected: m.n_states(),
                got: choice.len(),
            });
        }
        for (x, &k) in choice.iter().enumerate() {
            if k >= m.choices(x).len() {
                return Err(Error::InadmissibleAction {
                    state: m.state_name(x).to_string(),
                    action: format!("choice #{k}"),
                });
            }
        }
        Ok(Self { choice })
    }

    pub fn choice_indices(&self) -> &[usize] {
        &self.choice
    }

    /// The admissible pair used at state `x`.
    pub fn choice<'m>(&self, m: &'m Mdp, x: usize) -> &'m Choice {
        &m.choices(x)[self.choice[x]]
    }

    pub fn action(&self, m: &Mdp, x: usize) -> usize {
        self.choice(m, x).action
    }

    pub fn display<'a>(&'a self, m: &'a Mdp) -> PolicyDisplay<'a> {
        PolicyDisplay { policy: self, mdp: m }
    }

    /// `state -> action` name map, in state order.
    pub fn to_named(&self, m: &Mdp) -> IndexMap<String, String> {
        (0..m.n_states())
            .map(|x| {
                (
                    m.state_name(x).to_string(),
                    m.action_name(self.action(m, x)).to_string(),
                )
            })
            .collect()
    }
}

pub struct PolicyDisplay<'a> {
    policy: &'a StationaryPolicy,
    mdp: &'a Mdp,
}

impl fmt::Display for PolicyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for x in 0..self.mdp.n_states() {
            if x > 0 {
                write!(f, ", ")?;
            }
            let a = self.policy.action(self.mdp, x);
            write!(f, "{}: {}", self.mdp.state_name(x), self.mdp.action_name(a))?;
        }
        write!(f, "}}")
    }
}

/// Streaming odometer over F in lexicographic (state, action) order: the
/// first state is the most significant digit.
#[derive(Clone, Debug)]
pub struct PolicyIter {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for PolicyIter {
    type Item = StationaryPolicy;

    fn next(&mut self) -> Option<StationaryPolicy> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for (digit, &radix) in succ.iter_mut().zip(&self.radices).rev() {
            *digit += 1;
            if *digit < radix {
                carried = false;
                break;
            }
            *digit = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(StationaryPolicy { choice: current })
    }
}

pub fn enumerate_stationary_policies(m: &Mdp) -> PolicyIter {
    PolicyIter {
        radices: (0..m.n_states()).map(|x| m.choices(x).len()).collect(),
        next: Some(vec![0; m.n_states()]),
    }
}

/// Random access into the lexicographic enumeration: policy number `index`.
pub(crate) fn policy_at(m: &Mdp, mut index: u64) -> StationaryPolicy {
    let n = m.n_states();
    let mut choice = vec![0; n];
    for x in (0..n).rev() {
        let radix = m.choices(x).len() as u64;
        choice[x] = (index % radix) as usize;
        index /= radix;
    }
    StationaryPolicy { choice }
}

/// Fails when |F| exceeds `cap`; returns |F| otherwise.
pub(crate) fn checked_policy_count(m: &Mdp, cap: u64) -> Result<u64> {
    let count = m.policy_count();
    if count > cap as u128 {
        return Err(Error::EnumerationCap { count, cap });
    }
    Ok(count as u64)
}

/// Real vector indexed by the states of a model. Divergent entries hold `+∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueFunction(#[serde(with = "extended_floats")] Vec<f64>);

/// Serde adapters writing non-finite floats as `"inf"`, `"-inf"` or `"nan"`
/// (JSON has no literal for them).
pub mod extended_floats {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else if v.is_nan() {
            Repr::Text("nan".into())
        } else if v > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("not a number: {other:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(values.iter().map(|&v| to_repr(v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(d)?.into_iter().map(from_repr).collect()
    }

    /// Single-value form, for `#[serde(with = "extended_floats::scalar")]`.
    pub mod scalar {
        use super::*;

        pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
            to_repr(*v).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            from_repr(Repr::deserialize(d)?)
        }
    }

    /// Formats one value the way the serializers do.
    pub fn format(v: f64) -> String {
        match to_repr(v) {
            Repr::Num(v) => v.to_string(),
            Repr::Text(t) => t,
        }
    }
}

impl ValueFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn check_len(&self, m: &Mdp) -> Result<()> {
        if self.0.len() == m.n_states() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: m.n_states(),
                got: self.0.len(),
            })
        }
    }
}

impl Index<usize> for ValueFunction {
    type Output = f64;
    fn index(&self, x: usize) -> &f64 {
        &self.0[x]
    }
}

impl IndexMut<usize> for ValueFunction {
    fn index_mut(&mut self, x: usize) -> &mut f64 {
        &mut self.0[x]
    }
}

impl From<Vec<f64>> for ValueFunction {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}
