"""Write the catalog nets and logs to tests/fixtures as PNML and OCEL files."""

from pathlib import Path

from ocalign import catalog
from ocalign.synthetic import loan_log, loan_net
from ocalign.io_formats import write_object_centric_pnml, write_ocel, write_pnml

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    files = {
        "order_net.pnml": write_pnml(catalog.order_net(), "order"),
        "order_object_net.pnml": write_object_centric_pnml(catalog.order_object_net(), "order-oc"),
        "package_net.pnml": write_pnml(catalog.package_net(), "package"),
        "review_net.pnml": write_pnml(catalog.review_net(), "review"),
        "loan_net.pnml": write_pnml(loan_net(), "loan"),
        "loan_log.jsonocel": write_ocel(loan_log()),
        "order_log.jsonocel": write_ocel(catalog.order_log()),
        "product_only_log.jsonocel": write_ocel(catalog.product_only_log()),
        "swapped_shipment_log.jsonocel": write_ocel(catalog.swapped_shipment_log()),
        "package_log.jsonocel": write_ocel(catalog.package_log()),
        "package_log_repaired.jsonocel": write_ocel(catalog.package_log(bill_with_package=True)),
    }
    for name, text in files.items():
        (OUT / name).write_text(text, encoding="utf-8")
        print(OUT / name)


if __name__ == "__main__":
    main()
