//! Exact discrete networks: joint distributions by enumeration, conditioning,
//! graph surgery, and the intervention switch variable.
//!
//! CPT rows are indexed by the parents' joint assignment in mixed radix, the
//! first parent most significant.

use std::collections::HashMap;

use num::{BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::induction::{format_rational, parse_rational};

/// A variable as written in scenario files: probabilities are rational
/// strings such as `"1/5"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub domain: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Variable {
    name: String,
    domain: Vec<String>,
    parents: Vec<usize>,
    cpt: Vec<Vec<BigRational>>,
}

/// `(name, domain, parent names, cpt rows)` as accepted by [`DiscreteNet::new`].
pub type RawVariable = (String, Vec<String>, Vec<String>, Vec<Vec<BigRational>>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteNet {
    vars: Vec<Variable>,
    /// Topological order of `vars`.
    order: Vec<usize>,
}

/// One full assignment (value index per variable) and its probability.
pub type JointEntry = (Vec<usize>, BigRational);

impl DiscreteNet {
    pub fn from_specs(specs: &[VariableSpec]) -> Result<DiscreteNet> {
        let parsed = specs
            .iter()
            .map(|s| {
                let cpt = s
                    .cpt
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|p| parse_rational(p))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((s.name.clone(), s.domain.clone(), s.parents.clone(), cpt))
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteNet::new(parsed)
    }

    /// Builds a net from `(name, domain, parent names, cpt)` tuples, checking
    /// shapes, row sums and acyclicity.
    pub fn new(vars: Vec<RawVariable>) -> Result<DiscreteNet> {
        let mut index = HashMap::new();
        for (i, (name, domain, _, _)) in vars.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateVariable(name.clone()));
            }
            if domain.is_empty() {
                return Err(Error::EmptyDomain(name.clone()));
            }
        }
        let mut built = Vec::with_capacity(vars.len());
        for (name, domain, parents, cpt) in &vars {
            let parents = parents
                .iter()
                .map(|p| {
                    index
                        .get(p)
                        .copied()
                        .ok_or_else(|| Error::UnknownVariable(p.clone()))
                })
                .collect::<Result<Vec<usize>>>()?;
            built.push(Variable {
                name: name.clone(),
                domain: domain.clone(),
                parents,
                cpt: cpt.clone(),
            });
        }
        for v in &built {
            let rows: usize = v.parents.iter().map(|&p| built[p].domain.len()).product();
            if v.cpt.len() != rows {
                return Err(Error::CptShape {
                    var: v.name.clone(),
                    expected: rows,
                    got: v.cpt.len(),
                });
            }
            for (r, row) in v.cpt.iter().enumerate() {
                if row.len() != v.domain.len() {
                    return Err(Error::CptShape {
                        var: v.name.clone(),
                        expected: v.domain.len(),
                        got: row.len(),
                    });
                }
                if row.iter().any(|p| p.is_negative()) {
                    return Err(Error::NegativeProbability(v.name.clone()));
                }
                let sum: BigRational = row.iter().sum();
                if !sum.is_one() {
                    return Err(Error::CptRowSum {
                        var: v.name.clone(),
                        row: r,
                        sum: format_rational(&sum),
                    });
                }
            }
        }
        let order = topological_order(&built)?;
        Ok(DiscreteNet { vars: built, order })
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn domain(&self, var: &str) -> Result<&[String]> {
        Ok(&self.vars[self.var_index(var)?].domain)
    }

    pub fn parents(&self, var: &str) -> Result<Vec<&str>> {
        let v = &self.vars[self.var_index(var)?];
        Ok(v.parents
            .iter()
            .map(|&p| self.vars[p].name.as_str())
            .collect())
    }

    fn var_index(&self, var: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == var)
            .ok_or_else(|| Error::UnknownVariable(var.to_string()))
    }

    fn value_index(&self, var: usize, value: &str) -> Result<usize> {
        self.vars[var]
            .domain
            .iter()
            .position(|d| d == value)
            .ok_or_else(|| Error::UnknownValue {
                var: self.vars[var].name.clone(),
                value: value.to_string(),
            })
    }

    fn row_of(&self, var: usize, assignment: &[usize]) -> usize {
        self.vars[var]
            .parents
            .iter()
            .fold(0, |acc, &p| acc * self.vars[p].domain.len() + assignment[p])
    }

    /// Every full assignment with its probability, in lexicographic order of
    /// value indices (variables in declaration order). Zero-mass assignments
    /// are included.
    pub fn joint(&self) -> Vec<JointEntry> {
        let radix: Vec<usize> = self.vars.iter().map(|v| v.domain.len()).collect();
        let total: usize = radix.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut assignment = vec![0usize; self.vars.len()];
        for _ in 0..total {
            let p = self.order.iter().fold(BigRational::one(), |acc, &v| {
                if acc.is_zero() {
                    acc
                } else {
                    acc * &self.vars[v].cpt[self.row_of(v, &assignment)][assignment[v]]
                }
            });
            out.push((assignment.clone(), p));
            for i in (0..assignment.len()).rev() {
                assignment[i] += 1;
                if assignment[i] < radix[i] {
                    break;
                }
                assignment[i] = 0;
            }
        }
        out
    }

    fn resolve(&self, pairs: &[(&str, &str)]) -> Result<Vec<(usize, usize)>> {
        pairs
            .iter()
            .map(|(var, value)| {
                let v = self.var_index(var)?;
                Ok((v, self.value_index(v, value)?))
            })
            .collect()
    }

    /// p(query | given), exactly.
    pub fn conditional(&self, query: (&str, &str), given: &[(&str, &str)]) -> Result<BigRational> {
        let q = self.resolve(&[query])?[0];
        let g = self.resolve(given)?;
        let mut evidence = BigRational::zero();
        let mut both = BigRational::zero();
        for (a, p) in self.joint() {
            if g.iter().all(|&(v, x)| a[v] == x) {
                if a[q.0] == q.1 {
                    both += &p;
                }
                evidence += p;
            }
        }
        if evidence.is_zero() {
            return Err(Error::ZeroProbabilityEvidence);
        }
        Ok(both / evidence)
    }

    pub fn marginal(&self, var: &str, value: &str) -> Result<BigRational> {
        self.conditional((var, value), &[])
    }

    /// do(var = value): the variable's mechanism becomes a point mass and its
    /// incoming edges are removed.
    pub fn do_surgery(&self, var: &str, value: &str) -> Result<DiscreteNet> {
        let v = self.var_index(var)?;
        let x = self.value_index(v, value)?;
        let mut vars = self.vars.clone();
        vars[v].parents.clear();
        vars[v].cpt = vec![point_mass(vars[v].domain.len(), x)];
        let order = topological_order(&vars)?;
        Ok(DiscreteNet { vars, order })
    }

    /// Adds a root switch variable named `switch` as the last parent of
    /// `var`. Its domain is `none` followed by `force_<value>` for each value
    /// of `var`; under `none` the original mechanism applies, otherwise `var`
    /// takes the forced value. `prior` gives p(switch), `none` first.
    pub fn with_switch(
        &self,
        var: &str,
        switch: &str,
        prior: Vec<BigRational>,
    ) -> Result<DiscreteNet> {
        let v = self.var_index(var)?;
        if self.var_index(switch).is_ok() {
            return Err(Error::DuplicateVariable(switch.to_string()));
        }
        let n = self.vars[v].domain.len();
        let mut domain = vec!["none".to_string()];
        domain.extend(self.vars[v].domain.iter().map(|d| format!("force_{d}")));
        if prior.len() != domain.len() {
            return Err(Error::CptShape {
                var: switch.to_string(),
                expected: domain.len(),
                got: prior.len(),
            });
        }
        let mut specs: Vec<RawVariable> = self
            .vars
            .iter()
            .map(|x| {
                (
                    x.name.clone(),
                    x.domain.clone(),
                    x.parents
                        .iter()
                        .map(|&p| self.vars[p].name.clone())
                        .collect(),
                    x.cpt.clone(),
                )
            })
            .collect();
        let target = &mut specs[v];
        target.2.push(switch.to_string());
        let old = std::mem::take(&mut target.3);
        for row in old {
            target.3.push(row);
            for forced in 0..n {
                target.3.push(point_mass(n, forced));
            }
        }
        specs.push((switch.to_string(), domain, vec![], vec![prior]));
        DiscreteNet::new(specs)
    }

    /// For every value x of `var` and every value of every other variable,
    /// p(Q = q | switch = force_x) in the switched net equals p(Q = q) after
    /// do(var = x). Returns whether all of these hold exactly.
    pub fn switch_matches_surgery(&self, var: &str, prior: Vec<BigRational>) -> Result<bool> {
        let switched = self.with_switch(var, SWITCH, prior)?;
        let v = self.var_index(var)?;
        for x in &self.vars[v].domain {
            let forced = format!("force_{x}");
            let cut = self.do_surgery(var, x)?;
            for q in &self.vars {
                for value in &q.domain {
                    let lhs = switched.conditional((&q.name, value), &[(SWITCH, &forced)])?;
                    let rhs = cut.marginal(&q.name, value)?;
                    if lhs != rhs {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    pub fn has_cycle(&self) -> bool {
        topological_order(&self.vars).is_err()
    }
}

const SWITCH: &str = "__switch";

fn point_mass(n: usize, at: usize) -> Vec<BigRational> {
    (0..n)
        .map(|i| {
            if i == at {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
        .collect()
}

fn topological_order(vars: &[Variable]) -> Result<Vec<usize>> {
    let mut indegree: Vec<usize> = vars.iter().map(|v| v.parents.len()).collect();
    let mut children = vec![Vec::new(); vars.len()];
    for (i, v) in vars.iter().enumerate() {
        for &p in &v.parents {
            children[p].push(i);
        }
    }
    let mut ready: Vec<usize> = (0..vars.len())
        .filter(|&i| indegree[i] == 0)
        .rev()
        .collect();
    let mut order = Vec::with_capacity(vars.len());
    while let Some(i) = ready.pop() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    if order.len() != vars.len() {
        let stuck = (0..vars.len()).find(|&i| indegree[i] > 0).unwrap();
        return Err(Error::Cycle(vars[stuck].name.clone()));
    }
    Ok(order)
}

pub const TRUE: &str = "true";
pub const FALSE: &str = "false";

/// R → C with p(R = true) = `prior` and C a deterministic copy of R.
pub fn raincoat_net(prior: &BigRational) -> Result<DiscreteNet> {
    let binary = vec![TRUE.to_string(), FALSE.to_string()];
    DiscreteNet::new(vec![
        (
            "R".into(),
            binary.clone(),
            vec![],
            vec![vec![prior.clone(), BigRational::one() - prior]],
        ),
        (
            "C".into(),
            binary,
            vec!["R".into()],
            vec![point_mass(2, 0), point_mass(2, 1)],
        ),
    ])
}

/// The raincoat net with a three-state switch A ∈ {none, force_true,
/// force_false} feeding C. `switch_prior` defaults to uniform.
pub fn raincoat_switch_net(
    prior: &BigRational,
    switch_prior: Option<Vec<BigRational>>,
) -> Result<DiscreteNet> {
    let third = BigRational::new(1.into(), 3.into());
    raincoat_net(prior)?.with_switch(
        "C",
        "A",
        switch_prior.unwrap_or_else(|| vec![third.clone(), third.clone(), third]),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchVerdict {
    pub prior: BigRational,
    /// p(R=t | C=t, A=none); undefined when the prior is 0.
    pub observational: Option<BigRational>,
    /// p(R=t | A=force_true) in the switched net.
    pub switched: BigRational,
    /// p(R=t) after do(C=t) in the two-variable net.
    pub surgery: BigRational,
    /// Same comparison for the forced-false value.
    pub switched_false: BigRational,
    pub surgery_false: BigRational,
    pub equivalent: bool,
}

/// Checks that conditioning on the switch reproduces surgery for a
/// two-variable observational net R → C in which C copies R.
pub fn switch_equivalence_check(
    net2: &DiscreteNet,
    switch_prior: Option<Vec<BigRational>>,
) -> Result<SwitchVerdict> {
    let names = net2.variable_names();
    if names.len() != 2 {
        return Err(Error::MalformedBaseNet(format!(
            "expected 2 variables, found {}",
            names.len()
        )));
    }
    let (root, child) = match (
        net2.vars[0].parents.as_slice(),
        net2.vars[1].parents.as_slice(),
    ) {
        ([], [0]) => (0, 1),
        ([1], []) => (1, 0),
        _ => {
            return Err(Error::MalformedBaseNet(
                "expected a single edge R -> C".into(),
            ))
        }
    };
    let r = &net2.vars[root];
    let c = &net2.vars[child];
    if r.domain.len() != 2 || r.domain != c.domain {
        return Err(Error::MalformedBaseNet(
            "R and C must share one binary domain".into(),
        ));
    }
    if c.cpt != vec![point_mass(2, 0), point_mass(2, 1)] {
        return Err(Error::MalformedBaseNet(
            "C must copy R when unforced".into(),
        ));
    }
    let (t, f) = (r.domain[0].as_str(), r.domain[1].as_str());
    let third = BigRational::new(1.into(), 3.into());
    let switched = net2.with_switch(
        &c.name,
        "A",
        switch_prior.unwrap_or_else(|| vec![third.clone(), third.clone(), third]),
    )?;
    let force_t = format!("force_{t}");
    let force_f = format!("force_{f}");

    let prior = r.cpt[0][0].clone();
    let observational = match switched.conditional((&r.name, t), &[(&c.name, t), ("A", "none")]) {
        Ok(p) => Some(p),
        Err(Error::ZeroProbabilityEvidence) => None,
        Err(e) => return Err(e),
    };
    let sw_t = switched.conditional((&r.name, t), &[("A", &force_t)])?;
    let cut_t = net2.do_surgery(&c.name, t)?.marginal(&r.name, t)?;
    let sw_f = switched.conditional((&r.name, t), &[("A", &force_f)])?;
    let cut_f = net2.do_surgery(&c.name, f)?.marginal(&r.name, t)?;
    Ok(SwitchVerdict {
        equivalent: sw_t == cut_t && sw_f == cut_f,
        prior,
        observational,
        switched: sw_t,
        surgery: cut_t,
        switched_false: sw_f,
        surgery_false: cut_f,
    })
}
