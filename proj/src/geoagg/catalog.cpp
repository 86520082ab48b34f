#include "obeskit/geoagg.hpp"

namespace obeskit::geoagg {

std::string to_string(Axis a) {
    switch (a) {
        case Axis::resident: return "resident";
        case Axis::visitor: return "visitor";
        case Axis::vote: return "vote";
    }
    return "?";
}

std::string to_string(Sensor s) {
    switch (s) {
        case Sensor::acc: return "acc";
        case Sensor::loc: return "loc";
        case Sensor::gis: return "gis";
    }
    return "?";
}

// Population indicators the aggregation layer can publish per spatial cell,
// with the aggregation axes they support and the sensors they need.
const std::vector<CatalogEntry>& indicator_catalog() {
    using A = Axis;
    using S = Sensor;
    static const std::vector<CatalogEntry> entries = {
        // physical activity
        {"avg_activity_counts_per_min", "physical_activity", {A::visitor, A::vote}, {S::acc}},
        {"avg_hourly_steps", "physical_activity", {A::visitor, A::vote}, {S::acc}},
        {"avg_daily_steps", "physical_activity", {A::resident}, {S::acc}},
        {"avg_sedentary_minutes_after_school", "physical_activity", {A::resident}, {S::acc, S::loc}},
        {"avg_sleep_duration", "physical_activity", {A::resident}, {S::acc}},
        {"activity_type_distribution", "physical_activity", {A::resident}, {S::acc}},
        {"activity_level_distribution", "physical_activity", {A::visitor, A::vote}, {S::acc}},
        {"pct_sedentary_behavior", "physical_activity", {A::visitor, A::vote}, {S::acc}},
        {"pct_sedentary_avg_activity_level", "physical_activity", {A::resident}, {S::acc}},
        {"pct_walking_60min_daily", "physical_activity", {A::resident}, {S::acc}},
        // share of votes reporting at least one visit to a place category
        {"pct_votes_visiting_food_location", "visits", {A::vote}, {S::loc, S::gis}},
        {"pct_votes_visiting_supermarket", "visits", {A::vote}, {S::loc, S::gis}},
        {"pct_votes_visiting_fast_food", "visits", {A::vote}, {S::loc, S::gis}},
        {"pct_votes_visiting_park", "visits", {A::vote}, {S::loc, S::gis}},
        {"pct_votes_visiting_recreation", "visits", {A::vote}, {S::loc, S::gis}},
        {"pct_votes_visiting_sports_facility", "visits", {A::vote}, {S::loc, S::gis}},
        // per-resident visit frequencies
        {"avg_weekly_visits_restaurant", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_weekly_visits_food_outlet", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_weekly_visits_cafe", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_weekly_visits_fast_food", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_weekly_visits_food_location", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_weekly_visits_supermarket", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_weekly_visits_restaurant_or_food_outlet", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_weekly_visits_takeaway", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_weekly_visits_fast_food_or_takeaway", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_weekly_visits_bar", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_weekly_visits_liquor_store", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_weekly_visits_park", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_visits_indoor_recreation", "visits", {A::resident}, {S::loc, S::gis}},
        {"avg_visits_sports_facility", "visits", {A::resident}, {S::loc, S::gis}},
        // mobility
        {"transport_mode_distribution", "mobility", {A::resident, A::visitor, A::vote}, {S::acc}},
    };
    return entries;
}

}  // namespace obeskit::geoagg
