//! Built-in variety models.
//!
//! Sign convention for curve diagonals: with cup products `a_k b_k = pt`, the
//! diagonal class decomposes as `pt(x)1 + 1(x)pt + sum_k (b_k(x)a_k -
//! a_k(x)b_k)`. This is the unique odd-part sign compatible with the push-pull
//! identity `[Delta] p_1^* alpha = [Delta] p_2^* alpha`, which the first-page
//! differential needs; the opposite sign corresponds to the basis change
//! `a -> -a` and changes no dimension anywhere.

use crate::linalg::{rat, rat_int, Rational};
use crate::model::{ClassCombination, ClassId, CohClass, HodgeType, VarietyModel};

/// Affine space `C^d`: trivial cohomology, slope 1 by convention.
pub fn affine_space(d: u32) -> VarietyModel {
    assert!(d >= 1, "affine_space requires d >= 1");
    VarietyModel::assemble(
        format!("affine_space:{d}"),
        d,
        false,
        vec![unit_class()],
        vec![],
        vec![],
        vec![],
        Some(rat_int(1)),
    )
    .unwrap()
}

/// Algebraic torus `(C^*)^d`: exterior algebra on `d` degree-1 classes of
/// type (1,1); pure of slope 2; zero diagonal class.
pub fn torus(d: u32) -> VarietyModel {
    assert!(d >= 1, "torus requires d >= 1");
    assert!(d <= 6, "torus model limited to d <= 6");
    // one class per subset of {1..d}
    let subsets: Vec<Vec<u32>> = (0u32..(1 << d))
        .map(|mask| (0..d).filter(|k| mask >> k & 1 == 1).collect())
        .collect();
    let name_of = |s: &[u32]| -> String {
        if s.is_empty() {
            "1".to_string()
        } else {
            format!(
                "e{}",
                s.iter().map(|k| (k + 1).to_string()).collect::<String>()
            )
        }
    };
    let classes: Vec<CohClass> = subsets
        .iter()
        .map(|s| CohClass {
            name: name_of(s),
            degree: s.len() as u32,
            hodge: HodgeType::new(s.len() as u32, s.len() as u32),
        })
        .collect();
    let id_of = |s: &[u32]| ClassId(subsets.iter().position(|t| t == s).unwrap());
    let mut products = Vec::new();
    for (i, s) in subsets.iter().enumerate() {
        for (j, t) in subsets.iter().enumerate().skip(i) {
            if s.is_empty() || t.is_empty() {
                continue; // unit products are filled automatically
            }
            if s.iter().any(|k| t.contains(k)) {
                continue; // repeated generator: zero, omitted
            }
            // sign of the shuffle sorting s ++ t
            let inversions = s
                .iter()
                .map(|a| t.iter().filter(|b| *b < a).count())
                .sum::<usize>();
            let sign = if inversions % 2 == 1 { rat_int(-1) } else { rat_int(1) };
            let mut u: Vec<u32> = s.iter().chain(t.iter()).copied().collect();
            u.sort_unstable();
            products.push(((ClassId(i), ClassId(j)), vec![(sign, id_of(&u))]));
        }
    }
    VarietyModel::assemble(
        format!("torus:{d}"),
        d,
        false,
        classes,
        products,
        vec![],
        vec![],
        Some(rat_int(2)),
    )
    .unwrap()
}

/// The projective line: classes `1` and `pt`, diagonal `pt(x)1 + 1(x)pt`.
pub fn proj_line() -> VarietyModel {
    compact_curve("proj_line", 0)
}

/// An elliptic curve: classes `1, a, b, pt` with `ab = pt`.
pub fn elliptic() -> VarietyModel {
    compact_curve("elliptic", 1)
}

/// Smooth projective curve of genus `g`.
pub fn curve_compact(g: u32) -> VarietyModel {
    compact_curve(&format!("curve_compact:{g}"), g)
}

fn curve_class_names(g: u32) -> (Vec<String>, Vec<String>) {
    if g == 1 {
        (vec!["a".to_string()], vec!["b".to_string()])
    } else {
        (
            (1..=g).map(|k| format!("a{k}")).collect(),
            (1..=g).map(|k| format!("b{k}")).collect(),
        )
    }
}

fn compact_curve(name: &str, g: u32) -> VarietyModel {
    let (a_names, b_names) = curve_class_names(g);
    let mut classes = vec![unit_class()];
    for k in 0..g as usize {
        classes.push(CohClass {
            name: a_names[k].clone(),
            degree: 1,
            hodge: HodgeType::new(1, 0),
        });
    }
    for k in 0..g as usize {
        classes.push(CohClass {
            name: b_names[k].clone(),
            degree: 1,
            hodge: HodgeType::new(0, 1),
        });
    }
    classes.push(CohClass {
        name: "pt".to_string(),
        degree: 2,
        hodge: HodgeType::new(1, 1),
    });
    let a = |k: usize| ClassId(1 + k);
    let b = |k: usize| ClassId(1 + g as usize + k);
    let pt = ClassId(1 + 2 * g as usize);
    let mut products = Vec::new();
    for k in 0..g as usize {
        products.push(((a(k), b(k)), vec![(rat_int(1), pt)]));
    }
    let mut diagonal = vec![(rat_int(1), pt, ClassId(0)), (rat_int(1), ClassId(0), pt)];
    for k in 0..g as usize {
        diagonal.push((rat_int(1), b(k), a(k)));
        diagonal.push((rat_int(-1), a(k), b(k)));
    }
    VarietyModel::assemble(
        name,
        1,
        true,
        classes,
        products,
        diagonal,
        vec![(rat_int(1), pt)],
        Some(rat_int(1)),
    )
    .unwrap()
}

/// Smooth projective curve of genus `g` minus `r >= 1` points. The `r - 1`
/// extra degree-1 classes sit in Hodge type (1,1); all products of degree-1
/// classes vanish since `H^2 = 0`.
pub fn curve_open(g: u32, r: u32) -> VarietyModel {
    assert!(r >= 1, "curve_open requires r >= 1");
    let (a_names, b_names) = curve_class_names(g);
    let mut classes = vec![unit_class()];
    for k in 0..g as usize {
        classes.push(CohClass {
            name: a_names[k].clone(),
            degree: 1,
            hodge: HodgeType::new(1, 0),
        });
    }
    for k in 0..g as usize {
        classes.push(CohClass {
            name: b_names[k].clone(),
            degree: 1,
            hodge: HodgeType::new(0, 1),
        });
    }
    for k in 1..r {
        classes.push(CohClass {
            name: format!("c{k}"),
            degree: 1,
            hodge: HodgeType::new(1, 1),
        });
    }
    let a = |k: usize| ClassId(1 + k);
    let b = |k: usize| ClassId(1 + g as usize + k);
    let mut diagonal = Vec::new();
    for k in 0..g as usize {
        diagonal.push((rat_int(1), b(k), a(k)));
        diagonal.push((rat_int(-1), a(k), b(k)));
    }
    let slope = if g == 0 {
        if r >= 2 {
            Some(rat_int(2))
        } else {
            Some(rat_int(1))
        }
    } else if r == 1 {
        Some(rat_int(1))
    } else {
        None // H^1 mixes weight 1 and weight 2
    };
    VarietyModel::assemble(
        format!("curve_open:{g},{r}"),
        1,
        false,
        classes,
        vec![],
        diagonal,
        vec![],
        slope,
    )
    .unwrap()
}

/// Complement of a smooth plane curve of genus `g` in the projective plane:
/// `H^0 = Q` and `H^2 = Q^{2g}` pure of weight 3, so slope 3/2.
pub fn p2_minus_curve(g: u32) -> VarietyModel {
    let mut classes = vec![unit_class()];
    for k in 1..=g {
        classes.push(CohClass {
            name: format!("u{k}"),
            degree: 2,
            hodge: HodgeType::new(2, 1),
        });
    }
    for k in 1..=g {
        classes.push(CohClass {
            name: format!("v{k}"),
            degree: 2,
            hodge: HodgeType::new(1, 2),
        });
    }
    VarietyModel::assemble(
        format!("p2_minus_curve:{g}"),
        2,
        false,
        classes,
        vec![],
        vec![],
        vec![],
        Some(rat(3, 2)),
    )
    .unwrap()
}

fn unit_class() -> CohClass {
    CohClass {
        name: "1".to_string(),
        degree: 0,
        hodge: HodgeType::new(0, 0),
    }
}

/// Removes one point from a compact model: degree-2d classes disappear, the
/// point class becomes zero, the diagonal restricts, and the slope is
/// re-detected from the surviving classes.
pub fn puncture_once(model: &VarietyModel) -> Result<VarietyModel, String> {
    if !model.compact {
        return Err(format!("model `{}` is already noncompact", model.name));
    }
    let top = 2 * model.dim_c;
    let survivors: Vec<usize> = (0..model.classes.len())
        .filter(|&k| model.classes[k].degree < top)
        .collect();
    let remap: std::collections::BTreeMap<usize, ClassId> = survivors
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, ClassId(new)))
        .collect();
    let classes: Vec<CohClass> = survivors
        .iter()
        .map(|&k| model.classes[k].clone())
        .collect();
    let mut products = Vec::new();
    for (i, &oi) in survivors.iter().enumerate() {
        for (j, &oj) in survivors.iter().enumerate().skip(i) {
            let terms: ClassCombination = model
                .multiply(ClassId(oi), ClassId(oj))
                .iter()
                .filter_map(|(c, g)| remap.get(&g.0).map(|ng| (c.clone(), *ng)))
                .collect();
            let trivial_unit = model.classes[oi].degree == 0 || model.classes[oj].degree == 0;
            if !terms.is_empty() && !trivial_unit {
                products.push(((ClassId(i), ClassId(j)), terms));
            }
        }
    }
    let diagonal: Vec<(Rational, ClassId, ClassId)> = model
        .diagonal
        .iter()
        .filter_map(|(c, l, r)| {
            match (remap.get(&l.0), remap.get(&r.0)) {
                (Some(nl), Some(nr)) => Some((c.clone(), *nl, *nr)),
                _ => None,
            }
        })
        .collect();
    let slope = detect_slope(&classes);
    let punctured = VarietyModel::assemble(
        format!("{}_punctured", model.name),
        model.dim_c,
        false,
        classes,
        products,
        diagonal,
        vec![],
        slope,
    )?;
    let report = punctured.validate();
    if !report.is_empty() {
        return Err(format!(
            "punctured model invalid: {}",
            report.join("; ")
        ));
    }
    Ok(punctured)
}

/// The unique slope consistent with the classes, if any. Trivial cohomology
/// gets slope 1 by convention.
fn detect_slope(classes: &[CohClass]) -> Option<Rational> {
    let mut slope: Option<Rational> = None;
    for c in classes {
        if c.degree == 0 {
            continue;
        }
        let ratio = rat(c.hodge.weight() as i64, c.degree as i64);
        match &slope {
            None => slope = Some(ratio),
            Some(s) if *s == ratio => {}
            Some(_) => return None,
        }
    }
    slope.or_else(|| Some(rat_int(1)))
}

/// Resolves a catalog name of the form `name` or `name:args`.
pub fn by_name(spec: &str) -> Result<VarietyModel, String> {
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let parse_one = |args: Option<&str>, what: &str| -> Result<u32, String> {
        args.ok_or_else(|| format!("catalog `{name}` needs `{what}` argument, e.g. `{name}:1`"))?
            .trim()
            .parse::<u32>()
            .map_err(|_| format!("invalid `{what}` argument for catalog `{name}`"))
    };
    match name {
        "affine_space" => {
            let d = parse_one(args, "d")?;
            if d == 0 {
                return Err("affine_space requires d >= 1".to_string());
            }
            Ok(affine_space(d))
        }
        "torus" => {
            let d = parse_one(args, "d")?;
            if d == 0 || d > 6 {
                return Err("torus requires 1 <= d <= 6".to_string());
            }
            Ok(torus(d))
        }
        "proj_line" => Ok(proj_line()),
        "elliptic" => Ok(elliptic()),
        "curve_compact" => Ok(curve_compact(parse_one(args, "g")?)),
        "curve_open" => {
            let args = args.ok_or_else(|| {
                "catalog `curve_open` needs `g,r` arguments, e.g. `curve_open:1,1`".to_string()
            })?;
            let parts: Vec<&str> = args.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err("catalog `curve_open` needs exactly `g,r`".to_string());
            }
            let g = parts[0]
                .parse::<u32>()
                .map_err(|_| "invalid `g` for curve_open".to_string())?;
            let r = parts[1]
                .parse::<u32>()
                .map_err(|_| "invalid `r` for curve_open".to_string())?;
            if r == 0 {
                return Err("curve_open requires r >= 1".to_string());
            }
            Ok(curve_open(g, r))
        }
        "p2_minus_curve" => Ok(p2_minus_curve(parse_one(args, "g")?)),
        _ => Err(format!("unknown catalog name `{name}`")),
    }
}

/// Representative catalog entries for listings.
pub fn listing() -> Vec<VarietyModel> {
    vec![
        affine_space(1),
        affine_space(2),
        torus(1),
        torus(2),
        proj_line(),
        elliptic(),
        curve_compact(2),
        curve_open(0, 2),
        curve_open(1, 1),
        curve_open(1, 2),
        p2_minus_curve(1),
    ]
}
