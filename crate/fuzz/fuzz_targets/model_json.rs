#![no_main]

use libfuzzer_sys::fuzz_target;
use siot_trust::features::TrustFeatureVector;
use siot_trust::forest::{predict, ForestModel};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // a document that validates must also predict without panicking
    if let Ok(model) = ForestModel::from_json_str(text) {
        let probe = TrustFeatureVector::from_array([0.3, 0.6, 0.2, 0.9]);
        let _ = predict(&model, &probe);
        let _ = model.feature_importances();
    }
});
