/// Parses `start:end:count` into `count` points from `start` to `end`,
/// evenly spaced, or log-evenly spaced with `geom`.
pub fn parse_grid(spec: &str, geom: bool) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, count] = parts.as_slice() else {
        return Err(format!("t-grid '{spec}' is not of the form start:end:count"));
    };
    let num = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("bad number '{s}' in t-grid '{spec}'"))
    };
    let (start, end) = (num(start)?, num(end)?);
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| format!("bad point count '{count}' in t-grid '{spec}'"))?;
    if count == 0 {
        return Err("t-grid needs at least one point".into());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    if start >= end {
        return Err(format!("t-grid '{spec}' must have start < end"));
    }
    if geom && start <= 0.0 {
        return Err("a geometric t-grid needs start > 0".into());
    }
    let last = (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count)
        .map(|k| {
            let f = k as f64 / last;
            if geom {
                start * (end / start).powf(f)
            } else {
                start + (end - start) * f
            }
        })
        .collect();
    // land exactly on the endpoint
    grid[count - 1] = end;
    Ok(grid)
}
