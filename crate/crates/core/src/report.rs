use serde::Serialize;

/// Result of checking one named identity: the largest violation seen and,
/// when the identity is indexed, the index tuple where it occurred.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub max_violation: f64,
    pub worst_index: Vec<usize>,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `violation` for `name`, keeping the worst value per name.
    pub fn record(&mut self, name: &str, violation: f64, index: &[usize]) {
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if let Some(c) = self.checks.iter_mut().find(|c| c.name == name) {
            if v > c.max_violation {
                c.max_violation = v;
                c.worst_index = index.to_vec();
            }
        } else {
            self.checks.push(IdentityCheck {
                name: name.to_string(),
                max_violation: v,
                worst_index: index.to_vec(),
            });
        }
    }

    pub fn merge(&mut self, other: &IdentityReport) {
        for c in &other.checks {
            self.record(&c.name, c.max_violation, &c.worst_index);
        }
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn violation(&self, name: &str) -> f64 {
        self.get(name).map_or(0.0, |c| c.max_violation)
    }

    pub fn max_violation(&self) -> f64 {
        self.checks.iter().map(|c| c.max_violation).fold(0.0, f64::max)
    }

    /// Checks whose violation exceeds `tol`.
    pub fn failures(&self, tol: f64) -> Vec<&IdentityCheck> {
        self.checks.iter().filter(|c| c.max_violation > tol).collect()
    }
}
