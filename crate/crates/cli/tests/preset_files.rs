use contact_grasp::presets::*;
use contact_grasp::scene_file::SceneFile;
use std::path::Path;

#[test]
fn committed_presets_match_builders() {
    for name in NAMES {
        let built = build(name).unwrap().to_toml().unwrap();
        assert_eq!(built, preset_text(name).unwrap(), "preset {name} is stale");
    }
}

#[test]
fn presets_round_trip_byte_for_byte() {
    for name in NAMES {
        let text = preset_text(name).unwrap();
        let parsed = SceneFile::parse(text, Path::new(name)).unwrap();
        assert_eq!(parsed.to_toml().unwrap(), text);
        parsed.load(Path::new(".")).unwrap();
    }
}
