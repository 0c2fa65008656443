#pragma once

// Default component catalog. Kept byte-identical to data/catalog.conf
// (checked by the catalog unit tests).

namespace auditlab {

inline constexpr const char* kDefaultCatalogText = R"CATALOG(# Startup profile component catalog.
# Categorical components: level:weight pairs (weights may be written as a/b and
# must sum to 1). Ranges: lo..hi (inclusive). Lists: items separated by '|'.
catalog.version = 1
benchmark_year = 2020

team = white_female:1/4, asian_female:1/4, white_male:1/4, asian_male:1/4
founders = single:8/16, two:8/16
age_group = young:1/2, old:1/2
graduation_year.young = 2005..2019
graduation_year.old = 1980..2005
education = top:8/16, common:8/16
serial_founder = serial:8/16, first_time:8/16
founding_year = 2016:1/4, 2017:1/4, 2018:1/4, 2019:1/4
n_advantages = 1:4/16, 2:4/16, 3:4/16, 4:4/16
traction = none:8/16, positive:8/16
monthly_revenue = 5000..80000
growth_rate = 0.05..0.60
category = B2B:8/16, B2C:8/16
employees = 0-10:1/4, 10-20:1/4, 20-50:1/4, 50+:1/4
market = domestic:8/16, international:8/16
mission = profit:8/16, profit_ipo:4/16, profit_esg:4/16
location = US:0.7, non-US:0.3
existing_investors = 0:1/4, 1:1/4, 2:1/4, 3+:1/4

schools.top = Brown University|Columbia University|Cornell University|Dartmouth College|Harvard University|Princeton University|University of Pennsylvania|Yale University|California Institute of Technology|MIT|Northwestern University|Stanford University|University of Chicago
schools.common = Thomas Jefferson University|University of Arkansas|Hofstra University|University of Mississippi|Virginia Commonwealth University|Adelphi University|University of Maryland-Baltimore County|University of Rhode Island|St. John's University|University of Detroit Mercy|University of Idaho|Biola University|Chatham University|Bellarmine University|Bethel University|Loyola University New Orleans|Robert Morris University|Regis University|Widener University|Laurentian University|Auburn University|Rochester Institute of Technology|University of Tulsa|DePaul University
advantages = trade secrets/patents registered|celebrity endorsement|exclusive partnerships|accumulated many pilot consumers|adoption of the latest technology|pricing advantage|great product design|1st mover|lower cost|economies of scale

names.first.female = Abigail|Alicia|Amanda|Amber|Amy|Angela|Anna|Brenda|Brittany|Caroline|Cassandra|Catherine|Christina|Christine|Cynthia|Danielle|Elizabeth|Emily|Erica|Hayley|Heather|Jacqueline|Jenna|Jennifer|Julie|Kara|Karen|Kathleen|Kathryn|Katie|Katrina|Kayla|Kristy|Linda|Lisa|Madeline|Margaret|Mary|Megan|Melanie|Melinda|Melissa|Molly|Monica|Nichole|Patricia|Rachael|Sandra|Sara|Sarah|Teresa|Tiffany|Tina|Valerie|Vanessa|Victoria
names.first.male = Alan|Andrew|Anthony|Benjamin|Brian|Bryan|Charles|David|Dennis|Donald|Dustin|Eric|Erik|Evan|Frank|George|Ian|Jack|Jacob|Jared|Jason|Jeffery|Jeffrey|Jeremy|John|Justin|Keith|Kevin|Luke|Marcus|Mark|Matt|Matthew|Michael|Nathan|Nicholas|Patrick|Paul|Peter|Philip|Phillip|Robert|Scott|Sean|Seth|Shane|Stephen|Steven|Timothy|Travis|Victor|Vincent|William|Zachary
names.last.asian = Chan|Chang|Chen|Cheng|Cheung|Cho|Choi|Chung|Dinh|Duong|Ho|Hoang|Hsu|Hu|Huang|Huynh|Hwang|Jiang|Kwon|Li|Liang|Lin|Liu|Lu|Luong|Luu|Ngo|Nguyen|Pham|Tang|Thao|Truong|Tsai|Wang|Wong|Wu|Xiong|Xu|Yang|Yi|Yoon|Yu|Zhang|Zhao|Zheng|Zhou|Zhu
names.last.white = Adams|Allen|Anderson|Baker|Barker|Beck|Becker|Bennett|Burke|Campbell|Carpenter|Carroll|Collins|Cook|Cooper|Cox|Evans|Gray|Hall|Hansen|Hill|Hoffman|Hughes|Jensen|Keller|Kelly|Larson|Martin|Meyer|Miller|Moore|Morris|Myers|Nelson|Parker|Peterson|Phillips|Price|Reed|Roberts|Rogers|Russell|Schultz|Schwartz|Smith|Snyder|Stone|Sullivan|Taylor|Thompson|Walsh|Ward|Weaver|Welch|White|Wilson|Wright
)CATALOG";

}  // namespace auditlab
