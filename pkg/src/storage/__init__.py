# Storage Module
