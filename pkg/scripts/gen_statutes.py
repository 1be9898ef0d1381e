"""Regenerate the bundled statute fixture files under src/forge/data/.

The fixtures carry the chapter/article skeletons of both frameworks plus the
fully nested Article 5(1)(h)(iii) clause chain used by the seed tests.
"""

from __future__ import annotations

from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "forge" / "data"

EU_CHAPTERS: list[tuple[str, str, list[tuple[int, str]]]] = [
    ("I", "General Provisions", [
        (1, "Subject Matter"),
        (2, "Scope"),
        (3, "Definitions"),
        (4, "AI literacy"),
    ]),
    ("II", "Prohibited AI Practices", [
        (5, "Prohibited AI Practices"),
    ]),
    ("III", "High-Risk AI System", [
        (6, "Classification Rules for High-Risk AI Systems"),
        (7, "Amendments to Annex III"),
        (8, "Compliance with the Requirements"),
        (9, "Risk Management System"),
        (10, "Data and Data Governance"),
        (11, "Technical Documentation"),
        (12, "Record-Keeping"),
        (13, "Transparency and Provision of Information to Deployers"),
        (14, "Human Oversight"),
        (15, "Accuracy, Robustness and Cybersecurity"),
        (16, "Obligations of Providers of High-Risk AI Systems"),
        (17, "Quality Management System"),
        (18, "Documentation Keeping"),
        (19, "Automatically Generated Logs"),
        (20, "Corrective Actions and Duty of Information"),
        (21, "Cooperation with Competent Authorities"),
        (22, "Authorised Representatives of Providers of High-Risk AI Systems"),
        (23, "Obligations of Importers"),
        (24, "Obligations of Distributors"),
        (25, "Responsibilities Along the AI Value Chain"),
        (26, "Obligations of Deployers of High-Risk AI Systems"),
        (27, "Fundamental Rights Impact Assessment for High-Risk AI Systems"),
        (28, "Notifying Authorities"),
        (29, "Application of a Conformity Assessment Body for Notification"),
        (30, "Notification Procedure"),
        (31, "Requirements Relating to Notified Bodies"),
        (32, "Presumption of Conformity with Requirements Relating to Notified Bodies"),
        (33, "Subsidiaries of Notified Bodies and Subcontracting"),
        (34, "Operational Obligations of Notified Bodies"),
        (35, "Identification Numbers and Lists of Notified Bodies"),
        (36, "Changes to Notifications"),
        (37, "Challenge to the Competence of Notified Bodies"),
        (38, "Coordination of Notified Bodies"),
        (39, "Conformity Assessment Bodies of Third Countries"),
        (40, "Harmonised Standards and Standardisation Deliverables"),
        (41, "Common Specifications"),
        (42, "Presumption of Conformity with Certain Requirements"),
        (43, "Conformity Assessment"),
        (44, "Certificates"),
        (45, "Information Obligations of Notified Bodies"),
        (46, "Derogation from Conformity Assessment Procedure"),
        (47, "EU Declaration of Conformity"),
        (48, "CE Marking"),
        (49, "Registration"),
    ]),
    ("IV", "Transparency Obligations for Providers and Deployers of Certain AI Systems", [
        (50, "Transparency Obligations for Providers and Deployers of Certain AI Systems"),
    ]),
    ("V", "General-Purpose AI Models", [
        (51, "Classification of General-Purpose AI Models as General-Purpose AI Models with Systemic Risk"),
        (52, "Procedure"),
        (53, "Obligations for Providers of General-Purpose AI Models"),
        (54, "Authorised Representatives of Providers of General-Purpose AI Models"),
        (55, "Obligations for Providers of General-Purpose AI Models with Systemic Risk"),
        (56, "Codes of Practice"),
    ]),
    ("VI", "Measures in Support of Innovation", [
        (57, "AI Regulatory Sandboxes"),
        (58, "Detailed Arrangements for, and Functioning of, AI Regulatory Sandboxes"),
        (59, "Further Processing of Personal Data for Developing Certain AI Systems in the Public Interest in the AI Regulatory Sandbox"),
        (60, "Testing of High-Risk AI Systems in Real World Conditions Outside AI Regulatory Sandboxes"),
        (61, "Informed Consent to Participate in Testing in Real World Conditions Outside AI Regulatory Sandboxes"),
        (62, "Measures for Providers and Deployers, in Particular SMEs, Including Start-Ups"),
        (63, "Derogations for Specific Operators"),
    ]),
    ("VII", "Governance", [
        (64, "AI Office"),
        (65, "Establishment and Structure of the European Artificial Intelligence Board"),
        (66, "Tasks of the Board"),
        (67, "Advisory Forum"),
        (68, "Scientific Panel of Independent Experts"),
        (69, "Access to the Pool of Experts by the Member States"),
        (70, "Designation of National Competent Authorities and Single Point of Contact"),
    ]),
    ("VIII", "EU Database for High-Risk AI Systems", [
        (71, "EU Database for High-Risk AI Systems Listed in Annex III"),
    ]),
    ("IX", "Post-Market Monitoring, Information Sharing and Market Surveillance", [
        (72, "Post-Market Monitoring by Providers and Post-Market Monitoring Plan for High-Risk AI Systems"),
        (73, "Reporting of Serious Incidents"),
        (74, "Market Surveillance and Control of AI Systems in the Union Market"),
        (75, "Mutual Assistance, Market Surveillance and Control of General-Purpose AI Systems"),
        (76, "Supervision of Testing in Real World Conditions by Market Surveillance Authorities"),
        (77, "Powers of Authorities Protecting Fundamental Rights"),
        (78, "Confidentiality"),
        (79, "Procedure at National Level for Dealing with AI Systems Presenting a Risk"),
        (80, "Procedure for Dealing with AI Systems Classified by the Provider as Non-High-Risk in Application of Annex III"),
        (81, "Union Safeguard Procedure"),
        (82, "Compliant AI Systems Which Present a Risk"),
        (83, "Formal Non-Compliance"),
        (84, "Union AI Testing Support Structures"),
        (85, "Right to Lodge a Complaint with a Market Surveillance Authority"),
        (86, "Right to Explanation of Individual Decision-Making"),
        (87, "Reporting of Infringements and Protection of Reporting Persons"),
        (88, "Enforcement of the Obligations of Providers of General-Purpose AI Models"),
        (89, "Monitoring Actions"),
        (90, "Alerts of Systemic Risks by the Scientific Panel"),
        (91, "Power to Request Documentation and Information"),
        (92, "Power to Conduct Evaluations"),
        (93, "Power to Request Measures"),
        (94, "Procedural Rights of Economic Operators of the General-Purpose AI Model"),
    ]),
    ("X", "Codes of Conduct and Guidelines", [
        (95, "Codes of Conduct for Voluntary Application of Specific Requirements"),
        (96, "Guidelines from the Commission on the Implementation of this Regulation"),
    ]),
    ("XI", "Delegation of Power and Committee Procedure", [
        (97, "Exercise of the Delegation"),
        (98, "Committee Procedure"),
    ]),
    ("XII", "Penalties", [
        (99, "Penalties"),
        (100, "Administrative Fines on Union Institutions, Bodies, Offices and Agencies"),
        (101, "Fines for Providers of General-Purpose AI Models"),
    ]),
    ("XIII", "Final Provisions", [
        (102, "Amendment to Regulation (EC) No 300/2008"),
        (103, "Amendment to Regulation (EU) No 167/2013"),
        (104, "Amendment to Regulation (EU) No 168/2013"),
        (105, "Amendment to Directive 2014/90/EU"),
        (106, "Amendment to Directive (EU) 2016/797"),
        (107, "Amendment to Regulation (EU) 2018/858"),
        (108, "Amendments to Regulation (EU) 2018/1139"),
        (109, "Amendment to Regulation (EU) 2019/2144"),
        (110, "Amendment to Directive (EU) 2020/1828"),
        (111, "AI Systems Already Placed on the Market or put into Service and General-Purpose AI Models Already Placed on the Market"),
        (112, "Evaluation and Review"),
        (113, "Entry into Force and Application"),
    ]),
]

GDPR_CHAPTERS: list[tuple[str, str, list[tuple[int, str]]]] = [
    ("1", "General provisions", [
        (1, "Subject-matter and objectives"),
        (2, "Material scope"),
        (3, "Territorial scope"),
        (4, "Definitions"),
    ]),
    ("2", "Principles", [
        (5, "Principles relating to processing of personal data"),
        (6, "Lawfulness of processing"),
        (7, "Conditions for consent"),
        (8, "Conditions applicable to child’s consent in relation to information society services"),
        (9, "Processing of special categories of personal data"),
        (10, "Processing of personal data relating to criminal convictions and offences"),
        (11, "Processing which does not require identification"),
    ]),
    ("3", "Rights of the data subject", [
        (12, "Transparent information, communication and modalities for the exercise of the rights of the data subject"),
        (13, "Information to be provided where personal data are collected from the data subject"),
        (14, "Information to be provided where personal data have not been obtained from the data subject"),
        (15, "Right of access by the data subject"),
        (16, "Right to rectification"),
        (17, "Right to erasure (‘right to be forgotten’)"),
        (18, "Right to restriction of processing"),
        (19, "Notification obligation regarding rectification or erasure of personal data or restriction of processing"),
        (20, "Right to data portability"),
        (21, "Right to object"),
        (22, "Automated individual decision-making, including profiling"),
        (23, "Restrictions"),
    ]),
    ("4", "Controller and processor", [
        (24, "Responsibility of the controller"),
        (25, "Data protection by design and by default"),
        (26, "Joint controllers"),
        (27, "Representatives of controllers or processors not established in the Union"),
        (28, "Processor"),
        (29, "Processing under the authority of the controller or processor"),
        (30, "Records of processing activities"),
        (31, "Cooperation with the supervisory authority"),
        (32, "Security of processing"),
        (33, "Notification of a personal data breach to the supervisory authority"),
        (34, "Communication of a personal data breach to the data subject"),
        (35, "Data protection impact assessment"),
        (36, "Prior consultation"),
        (37, "Designation of the data protection officer"),
        (38, "Position of the data protection officer"),
        (39, "Tasks of the data protection officer"),
        (40, "Codes of conduct"),
        (41, "Monitoring of approved codes of conduct"),
        (42, "Certification"),
        (43, "Certification bodies"),
    ]),
    ("5", "Transfers of personal data to third countries or international organisations", [
        (44, "General principle for transfers"),
        (45, "Transfers on the basis of an adequacy decision"),
        (46, "Transfers subject to appropriate safeguards"),
        (47, "Binding corporate rules"),
        (48, "Transfers or disclosures not authorised by Union law"),
        (49, "Derogations for specific situations"),
        (50, "International cooperation for the protection of personal data"),
    ]),
    ("6", "Independent supervisory authorities", [
        (51, "Supervisory authority"),
        (52, "Independence"),
        (53, "General conditions for the members of the supervisory authority"),
        (54, "Rules on the establishment of the supervisory authority"),
        (55, "Competence"),
        (56, "Competence of the lead supervisory authority"),
        (57, "Tasks"),
        (58, "Powers"),
        (59, "Activity reports"),
    ]),
    ("7", "Cooperation and consistency", [
        (60, "Cooperation between the lead supervisory authority and the other supervisory authorities concerned"),
        (61, "Mutual assistance"),
        (62, "Joint operations of supervisory authorities"),
        (63, "Consistency mechanism"),
        (64, "Opinion of the Board"),
        (65, "Dispute resolution by the Board"),
        (66, "Urgency procedure"),
        (67, "Exchange of information"),
        (68, "European Data Protection Board"),
        (69, "Independence"),
        (70, "Tasks of the Board"),
        (71, "Reports"),
        (72, "Procedure"),
        (73, "Chair"),
        (74, "Tasks of the Chair"),
        (75, "Secretariat"),
        (76, "Confidentiality"),
    ]),
    ("8", "Remedies, liability and penalties", [
        (77, "Right to lodge a complaint with a supervisory authority"),
        (78, "Right to an effective judicial remedy against a supervisory authority"),
        (79, "Right to an effective judicial remedy against a controller or processor"),
        (80, "Representation of data subjects"),
        (81, "Suspension of proceedings"),
        (82, "Right to compensation and liability"),
        (83, "General conditions for imposing administrative fines"),
        (84, "Penalties"),
    ]),
    ("9", "Provisions relating to specific processing situations", [
        (85, "Processing and freedom of expression and information"),
        (86, "Processing and public access to official documents"),
        (87, "Processing of the national identification number"),
        (88, "Processing in the context of employment"),
        (89, "Safeguards and derogations relating to processing for archiving purposes in the public interest, scientific or historical research purposes or statistical purposes"),
        (90, "Obligations of secrecy"),
        (91, "Existing data protection rules of churches and religious associations"),
    ]),
    ("10", "Delegated acts and implementing acts", [
        (92, "Exercise of the delegation"),
        (93, "Committee procedure"),
    ]),
    ("11", "Final provisions", [
        (94, "Repeal of Directive 95/46/EC"),
        (95, "Relationship with Directive 2002/58/EC"),
        (96, "Relationship with previously concluded Agreements"),
        (97, "Commission reports"),
        (98, "Review of other Union legal acts on data protection"),
        (99, "Entry into force and application"),
    ]),
]

ARTICLE_5_CLAUSES = [
    "1. The following AI practices shall be prohibited:",
    "  (h) the use of ‘real-time’ remote biometric identification systems"
    " in publicly accessible spaces for the purposes of law enforcement, unless"
    " and in so far as such use is strictly necessary for one of the following"
    " objectives:",
    "    (iii) the localisation or identification of a person suspected of"
    " having committed a criminal offence, for the purpose of conducting a"
    " criminal investigation or prosecution or executing a criminal penalty for"
    " offences referred to in Annex II and punishable in the Member State"
    " concerned by a custodial sentence or a detention order for a maximum"
    " period of at least four years.",
]


def emit(title: str, chapters, deep_clauses: dict[int, list[str]]) -> str:
    lines = [f"# {title}", ""]
    for numeral, chap_title, articles in chapters:
        lines.append(f"## Chapter {numeral}: {chap_title}")
        lines.append("")
        for number, art_title in articles:
            lines.append(f"### Article {number}: {art_title}")
            for clause in deep_clauses.get(number, ()):
                lines.append(clause)
            lines.append("")
    while lines and not lines[-1]:
        lines.pop()
    return "\n".join(lines) + "\n"


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    eu_full = emit("EU Artificial Intelligence Act", EU_CHAPTERS, {5: ARTICLE_5_CLAUSES})
    (DATA / "eu_ai_act.statute").write_text(eu_full, encoding="utf-8")

    ch2 = [c for c in EU_CHAPTERS if c[0] == "II"]
    eu_ch2 = emit("EU Artificial Intelligence Act", ch2, {5: ARTICLE_5_CLAUSES})
    (DATA / "eu_ai_act_ch2.statute").write_text(eu_ch2, encoding="utf-8")

    gdpr = emit("General Data Protection Regulation", GDPR_CHAPTERS, {})
    (DATA / "gdpr.statute").write_text(gdpr, encoding="utf-8")
    print("wrote", sorted(p.name for p in DATA.iterdir()))


if __name__ == "__main__":
    main()
