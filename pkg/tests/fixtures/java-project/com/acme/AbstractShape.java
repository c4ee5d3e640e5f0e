package com.acme;

import java.sql.Connection;

public abstract class AbstractShape implements Shape {
    protected Connection conn;
    protected String name;

    public String describe() {
        System.out.println(name);
        return name;
    }

    public void save(String q) {
        conn.prepare(q);
    }
}
