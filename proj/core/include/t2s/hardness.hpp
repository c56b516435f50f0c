#pragma once

#include <string>
#include <string_view>

#include "t2s/errors.hpp"

namespace t2s::syntax {

/// Spider-style difficulty buckets.
enum class Difficulty { Easy, Medium, Hard, Extra };

std::string to_string(Difficulty d);
Difficulty difficulty_from_string(std::string_view s);

/// The three component counts the Spider evaluation hardness function is
/// built from. Exposed for tests; get_category applies the bucketing rules.
struct HardnessCounts {
    int component1 = 0;  // where/groupBy/orderBy/limit/extra joins/or/like
    int component2 = 0;  // nested subqueries and set operations
    int others = 0;      // aggregate count > 1, multi-column select, multi-condition where, multi-key group by
};

/// Parse the query with the Spider evaluation grammar and compute the
/// component counts. Throws ParseError when the query does not fit the
/// grammar.
HardnessCounts hardness_counts(std::string_view sql);

/// Difficulty label per the Spider evaluation hardness rules.
/// Throws ParseError on queries outside the grammar.
Difficulty get_category(std::string_view sql);

/// get_category with the conservative fallback: parse failures classify as
/// Extra. If `degraded` is non-null it is set when the fallback fired.
Difficulty get_category_or_extra(std::string_view sql, bool* degraded = nullptr);

}  // namespace t2s::syntax
