// Copyright 2026 The qlga-opt developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Bit-stable CSV field formatting: floating-point values are emitted in
//! scientific notation at 12 significant digits so identical runs produce
//! byte-identical output.

/// Twelve significant digits, scientific notation.
pub fn float(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_formats() {
        assert_eq!(float(1.0), "1.00000000000e0");
        assert_eq!(float(0.25), "2.50000000000e-1");
        assert_eq!(float(0.0), "0.00000000000e0");
        assert_eq!(flag(true), "1");
        assert_eq!(flag(false), "0");
    }
}
