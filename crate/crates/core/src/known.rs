//! Published answers for the lower segments of height one to six.

/// `(code, t-base levels, has a 4-crown stack as retract)`. Level lists are
/// only published for codes of height at least four ending in `1`.
pub const TABLE: &[(&str, &[usize], bool)] = &[
    ("1", &[], false),
    ("11", &[], false),
    ("10", &[], true),
    ("111", &[], true),
    ("101", &[], true),
    ("110", &[], false),
    ("100", &[], false),
    ("1111", &[0, 3], false),
    ("1101", &[0], false),
    ("1011", &[0, 2, 3], false),
    ("1001", &[0, 2], true),
    ("1110", &[], false),
    ("1100", &[], false),
    ("1010", &[], true),
    ("1000", &[], true),
    ("11111", &[0, 3], false),
    ("11101", &[0, 3], true),
    ("11011", &[0], false),
    ("10111", &[0, 2, 3], true),
    ("11001", &[0], true),
    ("10101", &[0, 2, 3, 4], true),
    ("10011", &[0, 2, 4], true),
    ("10001", &[0, 2, 4], true),
    ("11110", &[], true),
    ("11100", &[], true),
    ("11010", &[], false),
    ("10110", &[], true),
    ("11000", &[], false),
    ("10100", &[], true),
    ("10010", &[], false),
    ("10000", &[], false),
    ("111111", &[0, 3], true),
    ("111101", &[0, 3, 5], true),
    ("111011", &[0, 3, 5], false),
    ("110111", &[0], false),
    ("101111", &[0, 2, 3, 5], true),
    ("111001", &[0, 3, 5], false),
    ("110101", &[0], false),
    ("101101", &[0, 2, 3, 5], true),
    ("110011", &[0, 5], false),
    ("101011", &[0, 2, 3, 4, 5], false),
    ("100111", &[0, 2, 4, 5], false),
    ("110001", &[0], false),
    ("101001", &[0, 2, 3, 4, 5], true),
    ("100101", &[0, 2, 4], true),
    ("100011", &[0, 2, 4, 5], false),
    ("100001", &[0, 2, 4], true),
    ("111110", &[], false),
    ("111100", &[], false),
    ("111010", &[], false),
    ("110110", &[], false),
    ("101110", &[], false),
    ("111000", &[], false),
    ("110100", &[], false),
    ("101100", &[], false),
    ("110010", &[], false),
    ("101010", &[], true),
    ("100110", &[], true),
    ("110000", &[], false),
    ("101000", &[], true),
    ("100100", &[], true),
    ("100010", &[], true),
    ("100000", &[], true),
];

/// Codes of height six without a 4-crown stack retract, together with their
/// duals.
pub const HEIGHT_SIX_NEGATIVES: [&str; 9] = [
    "111011", "111001", "101011", "110001", "110011", "110111", "100111", "110101", "100011",
];

/// Published answer for `code`, if it is in the table.
pub fn answer(code: &str) -> Option<bool> {
    TABLE.iter().find(|e| e.0 == code).map(|e| e.2)
}

/// Published t-base levels for `code`, if the table lists them.
pub fn tbase_levels(code: &str) -> Option<&'static [usize]> {
    TABLE
        .iter()
        .find(|e| e.0 == code && !e.1.is_empty())
        .map(|e| e.1)
}
