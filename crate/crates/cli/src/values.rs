//! Flag-value parsers: the parameter `a` accepts symbolic square-root tokens
//! so irrational values enter at full floating precision instead of being
//! truncated on the command line.

/// Parses "sqrt(k)", "sqrt(k)/m", "p/q" or a plain float.
pub fn parse_sqrt_value(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(rest) = t.strip_prefix("sqrt(") {
        let close = rest
            .find(')')
            .ok_or_else(|| format!("missing ')' in '{t}'"))?;
        let inner: f64 = rest[..close]
            .trim()
            .parse()
            .map_err(|e| format!("bad sqrt argument in '{t}': {e}"))?;
        if inner < 0.0 {
            return Err(format!("sqrt of negative value in '{t}'"));
        }
        let tail = rest[close + 1..].trim();
        let denom = if tail.is_empty() {
            1.0
        } else if let Some(d) = tail.strip_prefix('/') {
            d.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad denominator in '{t}': {e}"))?
        } else {
            return Err(format!("trailing garbage after sqrt() in '{t}'"));
        };
        if denom == 0.0 {
            return Err(format!("zero denominator in '{t}'"));
        }
        return Ok(inner.sqrt() / denom);
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|e| format!("bad numerator in '{t}': {e}"))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|e| format!("bad denominator in '{t}': {e}"))?;
        if d == 0.0 {
            return Err(format!("zero denominator in '{t}'"));
        }
        return Ok(n / d);
    }
    t.parse::<f64>().map_err(|e| format!("bad number '{t}': {e}"))
}

/// Parses "l:j" into a pair of positive integers.
pub fn parse_ratio(s: &str) -> Result<(u64, u64), String> {
    let (l, j) = s
        .split_once(':')
        .ok_or_else(|| format!("ratio must look like 'l:j', got '{s}'"))?;
    let l: u64 = l.trim().parse().map_err(|e| format!("bad l in '{s}': {e}"))?;
    let j: u64 = j.trim().parse().map_err(|e| format!("bad j in '{s}': {e}"))?;
    if l == 0 || j == 0 {
        return Err("oscillation counts must be positive".into());
    }
    Ok((l, j))
}
