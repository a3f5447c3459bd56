//! Game descriptions as JSON files.
//!
//! ```json
//! { "family": "quadratic_public_goods",
//!   "params": { "a": [1.0, 1.0], "b": [1.0, 1.0], "gamma": 0.5 } }
//! ```
//!
//! Families: `quadratic_public_goods`, `linear_cournot`, `commons`,
//! `custom_quadratic`. Unknown keys anywhere are rejected so typos fail
//! loudly instead of silently falling back to defaults.

use std::path::Path;

use kantian_core::Game;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    family: String,
    params: serde_json::Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PublicGoodsParams {
    a: Vec<f64>,
    b: Vec<f64>,
    gamma: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CournotParams {
    p0: f64,
    p1: f64,
    cost: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommonsParams {
    n: usize,
    alpha: f64,
    beta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomQuadraticParams {
    a: Vec<f64>,
    b: Vec<f64>,
    gamma: Vec<Vec<f64>>,
    externality_sign: i8,
}

fn bad_input(msg: String) -> Failure {
    Failure {
        code: 2,
        message: msg,
    }
}

fn parse_params<T: serde::de::DeserializeOwned>(
    family: &str,
    params: serde_json::Value,
) -> Result<T, Failure> {
    serde_json::from_value(params)
        .map_err(|e| bad_input(format!("bad params for family {family}: {e}")))
}

/// Parses a game description from JSON text.
pub fn parse_game(text: &str) -> Result<Game, Failure> {
    let doc: GameFile =
        serde_json::from_str(text).map_err(|e| bad_input(format!("bad game file: {e}")))?;
    let game = match doc.family.as_str() {
        "quadratic_public_goods" => {
            let p: PublicGoodsParams = parse_params(&doc.family, doc.params)?;
            Game::quadratic_public_goods(p.a, p.b, p.gamma)
        }
        "linear_cournot" => {
            let p: CournotParams = parse_params(&doc.family, doc.params)?;
            Game::linear_cournot(p.p0, p.p1, p.cost)
        }
        "commons" => {
            let p: CommonsParams = parse_params(&doc.family, doc.params)?;
            Game::commons(p.n, p.alpha, p.beta)
        }
        "custom_quadratic" => {
            let p: CustomQuadraticParams = parse_params(&doc.family, doc.params)?;
            Game::custom_quadratic(p.a, p.b, p.gamma, p.externality_sign)
        }
        other => {
            return Err(bad_input(format!(
                "unknown family {other:?}; expected quadratic_public_goods, \
                 linear_cournot, commons, or custom_quadratic"
            )))
        }
    };
    game.map_err(Failure::from)
}

/// Reads and parses a game description file.
pub fn load_game(path: &Path) -> Result<Game, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad_input(format!("cannot read {}: {e}", path.display())))?;
    parse_game(&text)
}

/// The family name as it appears in game files, echoed into CSV comments.
pub fn family_name(game: &Game) -> &'static str {
    match game.family() {
        kantian_core::Family::QuadraticPublicGoods { .. } => "quadratic_public_goods",
        kantian_core::Family::LinearCournot { .. } => "linear_cournot",
        kantian_core::Family::Commons { .. } => "commons",
        kantian_core::Family::CustomQuadratic { .. } => "custom_quadratic",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kantian_core::PayoffModel;

    #[test]
    fn parses_each_family() {
        let qpg =
            r#"{"family":"quadratic_public_goods","params":{"a":[1,1],"b":[1,1],"gamma":0.5}}"#;
        assert_eq!(parse_game(qpg).unwrap().num_players(), 2);

        let cournot = r#"{"family":"linear_cournot","params":{"p0":10,"p1":1,"cost":[1,1,1]}}"#;
        assert_eq!(parse_game(cournot).unwrap().num_players(), 3);

        let commons = r#"{"family":"commons","params":{"n":2,"alpha":0.25,"beta":0.5}}"#;
        assert_eq!(parse_game(commons).unwrap().num_players(), 2);

        let custom = r#"{"family":"custom_quadratic","params":
            {"a":[1,1],"b":[1,1],"gamma":[[0,0.3],[0.2,0]],"externality_sign":1}}"#;
        assert_eq!(parse_game(custom).unwrap().num_players(), 2);
    }

    #[test]
    fn rejects_unknown_keys_and_families() {
        let typo =
            r#"{"family":"quadratic_public_goods","params":{"a":[1,1],"b":[1,1],"gama":0.5}}"#;
        assert_eq!(parse_game(typo).unwrap_err().code, 2);

        let extra = r#"{"family":"commons","params":{"n":2,"alpha":0.25,"beta":0.5},"x":1}"#;
        assert_eq!(parse_game(extra).unwrap_err().code, 2);

        let unknown = r#"{"family":"rock_paper_scissors","params":{}}"#;
        assert_eq!(parse_game(unknown).unwrap_err().code, 2);
    }

    #[test]
    fn invalid_parameters_exit_as_input_errors() {
        // beta outside (0, 1) breaks concavity of the commons family.
        let bad = r#"{"family":"commons","params":{"n":2,"alpha":0.25,"beta":1.5}}"#;
        assert_eq!(parse_game(bad).unwrap_err().code, 2);
    }
}
